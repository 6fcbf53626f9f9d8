import json

import numpy as np
import pytest

from bbviz.data import Dataset
from bbviz.errors import DataError, OptimizationError
from bbviz.models import (FitReport, MlpParams, RbfParams, TrainConfig,
                          confusion_matrix, count_errors, kmeans, mlp_forward,
                          mlp_gradient, mlp_init, mlp_objective, mlp_train,
                          model_from_doc, model_to_doc, one_hot, rbf_forward,
                          rbf_train, scg_minimize)


def small_problem(seed, n=12, d=4, k=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    labels = rng.integers(0, k, size=n)
    return x, labels, one_hot(labels, k)


class TestMlpBasics:
    def test_init_deterministic(self):
        a = mlp_init(5, 3, 2, seed=42)
        b = mlp_init(5, 3, 2, seed=42)
        assert np.array_equal(a.to_vector(), b.to_vector())
        c = mlp_init(5, 3, 2, seed=43)
        assert not np.array_equal(a.to_vector(), c.to_vector())

    def test_parameter_count(self):
        params = mlp_init(13, 3, 3, seed=0)
        assert params.to_vector().size == 13 * 3 + 3 + 3 * 3 + 3  # 54

    def test_init_scale(self):
        params = mlp_init(400, 200, 3, seed=1)
        assert abs(params.w1.std() - 1 / np.sqrt(400)) < 0.01
        assert np.array_equal(params.b1, np.zeros(200))

    def test_zero_params_output_half(self):
        zero = MlpParams(np.zeros((4, 3)), np.zeros(3), np.zeros((3, 2)), np.zeros(2))
        out = mlp_forward(zero, np.random.default_rng(0).standard_normal((6, 4)))
        assert np.allclose(out.values, 0.5)

    def test_outputs_in_open_interval(self):
        params = mlp_init(4, 3, 3, seed=3)
        x, _, _ = small_problem(1)
        out = mlp_forward(params, x)
        assert out.bounded
        assert np.all(out.values > 0.0) and np.all(out.values < 1.0)

    def test_vector_roundtrip(self):
        params = mlp_init(4, 3, 2, seed=9)
        back = MlpParams.from_vector(params.to_vector(), 4, 3, 2)
        assert np.array_equal(back.w1, params.w1)
        assert np.array_equal(back.b2, params.b2)


class TestObjective:
    def test_zero_params_penalty_free(self):
        x, _, targets = small_problem(2)
        zero = MlpParams(np.zeros((4, 3)), np.zeros(3), np.zeros((3, 3)), np.zeros(3))
        with_pen = mlp_objective(zero, x, targets, alpha=5.0)
        without = mlp_objective(zero, x, targets, alpha=0.0)
        assert with_pen == without

    def test_penalty_linear_in_alpha(self):
        x, _, targets = small_problem(3)
        params = mlp_init(4, 3, 3, seed=5)
        base = mlp_objective(params, x, targets, alpha=0.0)
        pen1 = mlp_objective(params, x, targets, alpha=1.0) - base
        pen2 = mlp_objective(params, x, targets, alpha=2.0) - base
        assert np.isclose(pen2, 2.0 * pen1)
        vec = params.to_vector()
        assert np.isclose(pen1, 0.5 * vec @ vec)

    def test_near_perfect_outputs_near_zero_loss(self):
        # drive outputs to the targets via huge output weights
        x = np.array([[1.0], [-1.0]])
        labels = np.array([0, 1])
        targets = one_hot(labels, 2)
        params = MlpParams(np.array([[5.0]]), np.zeros(1),
                           np.array([[40.0, -40.0]]), np.zeros(2))
        assert mlp_objective(params, x, targets, alpha=0.0) < 1e-10
        assert mlp_objective(params, x, targets, alpha=0.0,
                             error_fn="sum-of-squares") < 1e-10


class TestGradientOracle:
    @pytest.mark.parametrize("error_fn", ["cross-entropy", "sum-of-squares"])
    @pytest.mark.parametrize("alpha", [0.0, 0.5])
    def test_matches_central_differences(self, error_fn, alpha):
        for seed in range(5):
            x, _, targets = small_problem(seed)
            params = mlp_init(4, 3, 3, seed=100 + seed)
            vec = params.to_vector()
            analytic = mlp_gradient(params, x, targets, alpha, error_fn).to_vector()

            def fun(v):
                return mlp_objective(MlpParams.from_vector(v, 4, 3, 3),
                                     x, targets, alpha, error_fn)

            h = 1e-5
            numeric = np.empty_like(vec)
            for i in range(vec.size):
                up, dn = vec.copy(), vec.copy()
                up[i] += h
                dn[i] -= h
                numeric[i] = (fun(up) - fun(dn)) / (2 * h)
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel < 1e-6

    def test_penalty_only_component(self):
        x, _, targets = small_problem(1)
        params = mlp_init(4, 3, 3, seed=2)
        g0 = mlp_gradient(params, x, targets, alpha=0.0).to_vector()
        g1 = mlp_gradient(params, x, targets, alpha=1.0).to_vector()
        assert np.allclose(g1 - g0, params.to_vector(), atol=1e-12)


class TestScg:
    def test_convex_quadratic_recovered(self):
        # closed-form oracle: minimizer of 0.5 x'Qx - b'x is Q^{-1} b
        rng = np.random.default_rng(8)
        a = rng.standard_normal((5, 5))
        q = a.T @ a + np.eye(5)
        b = rng.standard_normal(5)
        expected = np.linalg.solve(q, b)

        x, trace = scg_minimize(lambda v: 0.5 * v @ q @ v - b @ v,
                                lambda v: q @ v - b,
                                np.zeros(5), iterations=200)
        assert np.max(np.abs(x - expected)) < 1e-8
        assert trace[-1] <= trace[0]

    def test_trace_non_increasing(self):
        x, labels, targets = small_problem(4)
        params = mlp_init(4, 3, 3, seed=11)

        def fun(v):
            return mlp_objective(MlpParams.from_vector(v, 4, 3, 3), x, targets, 0.0)

        def grad(v):
            return mlp_gradient(MlpParams.from_vector(v, 4, 3, 3), x, targets, 0.0).to_vector()

        _, trace = scg_minimize(fun, grad, params.to_vector(), iterations=60)
        assert np.all(np.diff(trace) <= 1e-12)

    def test_zero_budget_rejected(self):
        with pytest.raises(OptimizationError):
            scg_minimize(lambda v: float(v @ v), lambda v: 2 * v,
                         np.ones(3), iterations=0)

    def test_nonfinite_objective_names_iteration(self):
        def fun(v):
            return np.nan

        with pytest.raises(OptimizationError, match="iteration 0"):
            scg_minimize(fun, lambda v: 2 * v, np.ones(2), iterations=5)

    def test_converged_gradient_small(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 4))
        q = a.T @ a + np.eye(4)
        b = rng.standard_normal(4)
        x, _ = scg_minimize(lambda v: 0.5 * v @ q @ v - b @ v,
                            lambda v: q @ v - b, np.zeros(4), iterations=300)
        assert np.linalg.norm(q @ x - b) < 1e-6


class TestMlpTrain:
    def test_deterministic_report(self, wine_std):
        config = TrainConfig(hidden_units=2, iterations=40, restarts=3, seed=5)
        p1, r1 = mlp_train(wine_std, config)
        p2, r2 = mlp_train(wine_std, config)
        assert np.array_equal(p1.to_vector(), p2.to_vector())
        assert r1.training_errors == r2.training_errors
        assert np.array_equal(r1.objective_trace, r2.objective_trace)
        assert r1.chosen_restart == r2.chosen_restart

    def test_report_invariants(self, wine_std):
        config = TrainConfig(hidden_units=2, iterations=40, restarts=3, seed=5)
        _, report = mlp_train(wine_std, config)
        assert report.confusion.sum(axis=1).tolist() == [59, 71, 48]
        off_diag = report.confusion.sum() - np.trace(report.confusion)
        assert report.training_errors == off_diag

    def test_single_class_rejected(self):
        ds = Dataset(np.random.default_rng(0).standard_normal((10, 3)),
                     np.zeros(10, dtype=int), ("only", "other"))
        with pytest.raises(DataError):
            mlp_train(ds, TrainConfig(hidden_units=1, iterations=5))


class TestRegularizationEffect:
    def test_weight_norm_non_increasing_in_alpha(self, wine_std):
        alphas = (0.0, 0.05, 1.0, 5.0)
        medians = []
        for alpha in alphas:
            norms = []
            for seed in range(5):
                config = TrainConfig(hidden_units=3, iterations=100, alpha=alpha,
                                     restarts=1, seed=seed)
                params, _ = mlp_train(wine_std, config)
                vec = params.to_vector()
                norms.append(float(vec @ vec))
            medians.append(np.median(norms))
        assert all(a >= b for a, b in zip(medians, medians[1:]))


class TestCountErrors:
    def test_perfect_one_hot(self):
        outputs = one_hot([0, 1, 2, 1], 3)
        assert count_errors(outputs, [0, 1, 2, 1]) == 0
        assert np.array_equal(confusion_matrix(outputs, [0, 1, 2, 1]),
                              np.diag([1, 2, 1]))

    def test_tie_breaks_to_lowest_class(self):
        outputs = np.full((4, 3), 0.5)
        assert count_errors(outputs, [0, 0, 0, 0]) == 0
        assert count_errors(outputs, [1, 2, 1, 2]) == 4

    def test_errors_equal_offdiagonal(self, wine_std):
        params, report = mlp_train(wine_std, TrainConfig(hidden_units=2,
                                                         iterations=60,
                                                         restarts=2, seed=0))
        outputs = mlp_forward(params, wine_std.features)
        confusion = confusion_matrix(outputs, wine_std.labels)
        assert count_errors(outputs, wine_std.labels) == \
            confusion.sum() - np.trace(confusion)


class TestKmeans:
    def test_deterministic(self, wine_std):
        a = kmeans(wine_std.features, 4, seed=2)
        b = kmeans(wine_std.features, 4, seed=2)
        assert np.array_equal(a, b)

    def test_centers_bounded_by_data(self, wine_std):
        centers = kmeans(wine_std.features, 5, seed=1)
        lo, hi = wine_std.features.min(), wine_std.features.max()
        assert centers.min() >= lo and centers.max() <= hi

    def test_m_equals_n(self):
        x = np.random.default_rng(1).standard_normal((7, 2))
        centers = kmeans(x, 7, seed=0)
        assert np.allclose(np.sort(centers, axis=0), np.sort(x, axis=0))


class TestRbf:
    def test_interpolation_with_one_center_per_point(self, wine_std):
        rng = np.random.default_rng(0)
        idx = np.sort(rng.choice(wine_std.n, 20, replace=False))
        sub = Dataset(wine_std.features[idx], wine_std.labels[idx],
                      wine_std.class_names)
        _, report = rbf_train(sub, m=20, seed=0, ridge=1e-12)
        assert report.training_errors == 0

    def test_outputs_not_bounded_in_general(self, wine_std):
        params, _ = rbf_train(wine_std, m=6, seed=1, restarts=3)
        out = rbf_forward(params, wine_std.features)
        assert np.any(out.values < 0.0) or np.any(out.values > 1.0)

    def test_too_many_centers(self, wine_std):
        with pytest.raises(DataError):
            rbf_train(wine_std, m=wine_std.n + 1, seed=0)

    def test_deterministic(self, wine_std):
        p1, r1 = rbf_train(wine_std, m=5, seed=3, restarts=4)
        p2, r2 = rbf_train(wine_std, m=5, seed=3, restarts=4)
        assert np.array_equal(p1.centers, p2.centers)
        assert r1.chosen_restart == r2.chosen_restart


class TestPersistence:
    def test_mlp_roundtrip_bit_exact(self, wine_std):
        params, _ = mlp_train(wine_std, TrainConfig(hidden_units=2, iterations=30,
                                                    restarts=1, seed=1))
        doc = model_to_doc(params, {"seed": 1})
        back = model_from_doc(json.loads(json.dumps(doc)))
        assert np.array_equal(back.w1, params.w1)
        assert np.array_equal(back.b1, params.b1)
        assert np.array_equal(back.w2, params.w2)
        assert np.array_equal(back.b2, params.b2)

    def test_rbf_roundtrip_bit_exact(self, wine_std):
        params, _ = rbf_train(wine_std, m=4, seed=2)
        back = model_from_doc(json.loads(json.dumps(model_to_doc(params))))
        assert np.array_equal(back.centers, params.centers)
        assert back.width == params.width
        assert np.array_equal(back.w, params.w)

    def test_unknown_type_rejected(self):
        with pytest.raises(DataError):
            model_from_doc({"type": "tree"})

    def test_config_echoed(self):
        params = mlp_init(2, 2, 2, seed=0)
        doc = model_to_doc(params, {"alpha": 0.5})
        assert doc["config"] == {"alpha": 0.5}
