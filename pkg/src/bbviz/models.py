"""Desk-scale MLP and RBF classifiers plus the scaled conjugate gradient trainer.

The MLP is a single hidden layer (tanh) with logistic outputs, trained by
minimizing summed cross-entropy (default) or half summed squared error, plus
an optional quadratic weight penalty 0.5 * alpha * sum(params^2) applied to
every parameter including biases. The RBF has shared-width Gaussian units on
k-means centers and a ridge-regularized linear output layer, so its outputs
are not confined to [0, 1].

Training runs `restarts` independent fits with seeds seed+0..seed+R-1 and
keeps the one with the fewest training errors (ties: lowest final objective,
then lowest restart index), which makes the result independent of restart
scheduling.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import Dataset, seed_entropy
from .errors import DataError, FormatError, OptimizationError, ShapeError
from .geometry import OutputMatrix

ERROR_FUNCTIONS = ("cross-entropy", "sum-of-squares")

# Scaled conjugate gradient constants: initial step for the finite-difference
# curvature probe and initial/clamp values for the damping scale.
_SCG_SIGMA0 = 1e-4
_SCG_LAMBDA0 = 1e-6
_SCG_LAMBDA_MIN = 1e-15
_SCG_LAMBDA_MAX = 1e100
_SCG_F_TOL = 1e-10
_SCG_G_TOL = 1e-8


@dataclass(frozen=True)
class MlpParams:
    """Single-hidden-layer network weights: w1 (DxH), b1 (H), w2 (HxK), b2 (K)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise DataError(f"parameter {name} contains non-finite values")
            object.__setattr__(self, name, arr)
        d, h = self.w1.shape
        h2, k = self.w2.shape
        if h != h2 or self.b1.shape != (h,) or self.b2.shape != (k,):
            raise ShapeError("inconsistent MLP parameter shapes")

    @property
    def dims(self):
        return self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1,
                               self.w2.ravel(), self.b2])

    @classmethod
    def from_vector(cls, vec, d, h, k):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (d * h + h + h * k + k,):
            raise ShapeError(f"expected vector of length {d*h + h + h*k + k}")
        i = d * h
        w1 = vec[:i].reshape(d, h)
        b1 = vec[i:i + h]
        j = i + h
        w2 = vec[j:j + h * k].reshape(h, k)
        b2 = vec[j + h * k:]
        return cls(w1, b1, w2, b2)


@dataclass(frozen=True)
class RbfParams:
    """Gaussian-unit network: centers (MxD), shared width, linear output layer."""

    centers: np.ndarray
    width: float
    w: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.width <= 0:
            raise DataError(f"RBF width must be positive, got {self.width}")
        for name in ("centers", "w", "b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise DataError(f"parameter {name} contains non-finite values")
            object.__setattr__(self, name, arr)

    @property
    def dims(self):
        return self.centers.shape[1], self.centers.shape[0], self.w.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    hidden_units: int = 3
    iterations: int = 100
    alpha: float = 0.0
    restarts: int = 1
    seed: int = 0
    error_fn: str = "cross-entropy"

    def __post_init__(self):
        if self.hidden_units < 1:
            raise DataError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.iterations < 1:
            raise DataError(f"iterations must be >= 1, got {self.iterations}")
        if self.alpha < 0:
            raise DataError(f"alpha must be >= 0, got {self.alpha}")
        if self.restarts < 1:
            raise DataError(f"restarts must be >= 1, got {self.restarts}")
        if self.error_fn not in ERROR_FUNCTIONS:
            raise DataError(f"error_fn must be one of {ERROR_FUNCTIONS}")


@dataclass(frozen=True)
class FitReport:
    training_errors: int
    confusion: np.ndarray
    final_objective: float
    chosen_restart: int
    objective_trace: np.ndarray

    def to_doc(self) -> dict:
        return {
            "training_errors": int(self.training_errors),
            "confusion": self.confusion.astype(int).tolist(),
            "final_objective": float(self.final_objective),
            "chosen_restart": int(self.chosen_restart),
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def one_hot(labels, k: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    targets = np.zeros((labels.shape[0], k))
    targets[np.arange(labels.shape[0]), labels] = 1.0
    return targets


def mlp_init(d: int, h: int, k: int, seed: int) -> MlpParams:
    """Gaussian weights with std 1/sqrt(fan-in), zero biases, seeded."""
    if min(d, h, k) < 1:
        raise DataError(f"dimensions must be >= 1, got d={d} h={h} k={k}")
    rng = np.random.default_rng(seed_entropy(seed))
    w1 = rng.normal(scale=1.0 / np.sqrt(d), size=(d, h))
    w2 = rng.normal(scale=1.0 / np.sqrt(h), size=(h, k))
    return MlpParams(w1, np.zeros(h), w2, np.zeros(k))


def mlp_forward(params: MlpParams, x) -> OutputMatrix:
    """hidden = tanh(x w1 + b1); outputs = logistic(hidden w2 + b2)."""
    x = np.asarray(x, dtype=float)
    d = params.w1.shape[0]
    if x.ndim != 2 or x.shape[1] != d:
        raise ShapeError(f"expected N x {d} inputs, got {x.shape}")
    hidden = np.tanh(x @ params.w1 + params.b1)
    return OutputMatrix(expit(hidden @ params.w2 + params.b2))


def mlp_objective(params: MlpParams, x, targets, alpha: float,
                  error_fn: str = "cross-entropy") -> float:
    """Data term plus 0.5 * alpha * sum of all squared parameters."""
    x = np.asarray(x, dtype=float)
    targets = np.asarray(targets, dtype=float)
    hidden = np.tanh(x @ params.w1 + params.b1)
    z = hidden @ params.w2 + params.b2
    if error_fn == "cross-entropy":
        # sum over n,k of softplus(z) - t*z == -[t ln o + (1-t) ln(1-o)]
        data_term = float(np.sum(np.logaddexp(0.0, z) - targets * z))
    elif error_fn == "sum-of-squares":
        data_term = 0.5 * float(np.sum((expit(z) - targets) ** 2))
    else:
        raise DataError(f"error_fn must be one of {ERROR_FUNCTIONS}")
    vec = params.to_vector()
    return data_term + 0.5 * alpha * float(vec @ vec)


def mlp_gradient(params: MlpParams, x, targets, alpha: float,
                 error_fn: str = "cross-entropy") -> MlpParams:
    """Analytic gradient of mlp_objective, shaped like the parameters."""
    x = np.asarray(x, dtype=float)
    targets = np.asarray(targets, dtype=float)
    z1 = x @ params.w1 + params.b1
    hidden = np.tanh(z1)
    z2 = hidden @ params.w2 + params.b2
    out = expit(z2)
    if error_fn == "cross-entropy":
        delta2 = out - targets
    elif error_fn == "sum-of-squares":
        delta2 = (out - targets) * out * (1.0 - out)
    else:
        raise DataError(f"error_fn must be one of {ERROR_FUNCTIONS}")
    gw2 = hidden.T @ delta2 + alpha * params.w2
    gb2 = delta2.sum(axis=0) + alpha * params.b2
    delta1 = (delta2 @ params.w2.T) * (1.0 - hidden ** 2)
    gw1 = x.T @ delta1 + alpha * params.w1
    gb1 = delta1.sum(axis=0) + alpha * params.b1
    return MlpParams(gw1, gb1, gw2, gb2)


def scg_minimize(fun, grad, x0, iterations: int):
    """Scaled conjugate gradient over a flat parameter vector.

    Hessian-vector products are approximated by a one-sided difference of
    gradients along the search direction, damped by an adaptive scale lambda
    that grows on poor quadratic fits and shrinks on good ones; no line
    search is performed. Accepted steps never increase the objective.

    Returns (x, trace) where trace[0] is the initial objective and each
    later entry is the value after one iteration (repeats on rejected
    steps). Stops early once a step reduces the objective by less than
    1e-10 while the gradient norm is below 1e-8.
    """
    if iterations < 1:
        raise OptimizationError(f"iteration budget must be >= 1, got {iterations}")
    x = np.asarray(x0, dtype=float).copy()
    n = x.size

    fold = _checked_value(fun(x), 0)
    gradnew = _checked_grad(grad(x), 0)
    gradold = gradnew
    d = -gradnew
    trace = [fold]
    lam = _SCG_LAMBDA0
    success = True
    nsuccess = 0
    mu = kappa = theta = 0.0

    for it in range(1, iterations + 1):
        if success:
            mu = float(d @ gradnew)
            if mu >= 0:
                d = -gradnew
                mu = float(d @ gradnew)
            kappa = float(d @ d)
            if kappa < np.finfo(float).eps:
                break  # direction collapsed: gradient is numerically zero
            sigma = _SCG_SIGMA0 / np.sqrt(kappa)
            gplus = _checked_grad(grad(x + sigma * d), it)
            theta = float(d @ (gplus - gradnew)) / sigma

        delta = theta + lam * kappa
        if delta <= 0:
            delta = lam * kappa
            lam = lam - theta / kappa
        step = -mu / delta

        xnew = x + step * d
        fnew = _checked_value(fun(xnew), it)
        ratio = 2.0 * (fnew - fold) / (step * mu)

        if ratio >= 0:
            success = True
            nsuccess += 1
            x = xnew
            reduction = fold - fnew
            fold = fnew
            gradold = gradnew
            gradnew = _checked_grad(grad(x), it)
            trace.append(fold)
            if reduction < _SCG_F_TOL and np.linalg.norm(gradnew) < _SCG_G_TOL:
                break
            if float(gradnew @ gradnew) == 0.0:
                break
        else:
            success = False
            trace.append(fold)

        if ratio < 0.25:
            lam = min(4.0 * lam, _SCG_LAMBDA_MAX)
        elif ratio > 0.75:
            lam = max(0.5 * lam, _SCG_LAMBDA_MIN)

        if nsuccess == n:
            d = -gradnew
            nsuccess = 0
        elif success:
            gamma = float((gradold - gradnew) @ gradnew) / mu
            d = gamma * d - gradnew

    return x, np.array(trace)


def _checked_value(value, iteration):
    value = float(value)
    if not np.isfinite(value):
        raise OptimizationError(f"non-finite objective at iteration {iteration}")
    return value


def _checked_grad(vec, iteration):
    vec = np.asarray(vec, dtype=float)
    if not np.all(np.isfinite(vec)):
        raise OptimizationError(f"non-finite gradient at iteration {iteration}")
    return vec


def count_errors(outputs, labels) -> int:
    """Misclassification count under the largest-output rule (ties -> lowest
    class index, which is what argmax does)."""
    values = outputs.values if isinstance(outputs, OutputMatrix) else np.asarray(outputs)
    labels = np.asarray(labels, dtype=int)
    if values.shape[0] != labels.shape[0]:
        raise ShapeError("outputs and labels disagree on sample count")
    return int(np.sum(np.argmax(values, axis=1) != labels))


def confusion_matrix(outputs, labels, k: int | None = None) -> np.ndarray:
    """confusion[i, j] counts samples of true class i predicted as j."""
    values = outputs.values if isinstance(outputs, OutputMatrix) else np.asarray(outputs)
    labels = np.asarray(labels, dtype=int)
    if values.shape[0] != labels.shape[0]:
        raise ShapeError("outputs and labels disagree on sample count")
    if k is None:
        k = values.shape[1]
    preds = np.argmax(values, axis=1)
    confusion = np.zeros((k, k), dtype=int)
    np.add.at(confusion, (labels, preds), 1)
    return confusion


def _fit_once_mlp(features, targets, labels, config: TrainConfig, restart: int):
    d = features.shape[1]
    h = config.hidden_units
    k = targets.shape[1]
    params0 = mlp_init(d, h, k, config.seed + restart)

    def fun(vec):
        return mlp_objective(MlpParams.from_vector(vec, d, h, k),
                             features, targets, config.alpha, config.error_fn)

    def gradfun(vec):
        return mlp_gradient(MlpParams.from_vector(vec, d, h, k),
                            features, targets, config.alpha, config.error_fn).to_vector()

    vec, trace = scg_minimize(fun, gradfun, params0.to_vector(), config.iterations)
    params = MlpParams.from_vector(vec, d, h, k)
    errors = count_errors(mlp_forward(params, features), labels)
    return params, errors, trace


def mlp_train(dataset: Dataset, config: TrainConfig):
    """Best-of-restarts SCG training; returns (MlpParams, FitReport)."""
    if np.unique(dataset.labels).size < 2:
        raise DataError("training data must contain at least 2 classes")
    targets = one_hot(dataset.labels, dataset.k)

    best = None
    for restart in range(config.restarts):
        params, errors, trace = _fit_once_mlp(
            dataset.features, targets, dataset.labels, config, restart)
        key = (errors, float(trace[-1]), restart)
        if best is None or key < best[0]:
            best = (key, params, trace)
    (errors, final_obj, restart), params, trace = best
    confusion = confusion_matrix(mlp_forward(params, dataset.features),
                                 dataset.labels, dataset.k)
    report = FitReport(errors, confusion, final_obj, restart, trace)
    return params, report


def kmeans(x, m: int, seed: int, max_iter: int = 100) -> np.ndarray:
    """Lloyd's algorithm with seeded init from m distinct data rows.

    A cluster that empties is re-seeded from a random data point. Stops when
    assignments are stable or after max_iter passes.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 1 <= m <= n:
        raise DataError(f"need 1 <= centers <= {n}, got {m}")
    rng = np.random.default_rng(seed_entropy(seed))
    centers = x[rng.choice(n, size=m, replace=False)].copy()
    assign = np.full(n, -1)
    for _ in range(max_iter):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(dist, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(m):
            members = x[assign == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                centers[j] = x[rng.integers(n)]
    return centers


def _rbf_design(x, centers, width):
    sq = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-sq / (2.0 * width ** 2))


def rbf_forward(params: RbfParams, x) -> OutputMatrix:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.centers.shape[1]:
        raise ShapeError(f"expected N x {params.centers.shape[1]} inputs, got {x.shape}")
    return OutputMatrix(_rbf_design(x, params.centers, params.width) @ params.w + params.b)


def _shared_width(features, centers, m):
    # 2x the mean sample-to-nearest-center distance; falls back to the
    # max-gap/sqrt(2m) rule when centers sit exactly on every sample
    # (m == n interpolation), then to 1.0 if even that degenerates.
    nearest = np.sqrt(((features[:, None, :] - centers[None, :, :]) ** 2)
                      .sum(axis=2)).min(axis=1)
    width = 2.0 * float(nearest.mean())
    if width <= 0 and m > 1:
        gaps = ((centers[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        width = float(np.sqrt(gaps.max()) / np.sqrt(2.0 * m))
    return width if width > 0 else 1.0


def _fit_once_rbf(features, targets, labels, m, seed, ridge):
    centers = kmeans(features, m, seed)
    width = _shared_width(features, centers, m)
    phi = _rbf_design(features, centers, width)
    design = np.column_stack([phi, np.ones(len(phi))])
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    coeff = np.linalg.solve(gram, design.T @ targets)
    params = RbfParams(centers, width, coeff[:-1], coeff[-1])
    outputs = rbf_forward(params, features)
    errors = count_errors(outputs, labels)
    resid = outputs.values - targets
    objective = 0.5 * float(np.sum(resid ** 2)) + 0.5 * ridge * float(np.sum(coeff ** 2))
    return params, errors, objective


def rbf_train(dataset: Dataset, m: int, seed: int, ridge: float = 1e-8,
              restarts: int = 1):
    """k-means centers, shared Gaussian width, ridge output layer.

    Width is twice the mean distance from samples to their nearest center
    (with a max-gap/sqrt(2m) fallback for the degenerate centers-on-points
    case). Runs `restarts` seeded k-means inits (seed+0..) and keeps the fit
    with the fewest training errors, same tie-breaking as mlp_train.
    """
    if m > dataset.n:
        raise DataError(f"cannot place {m} centers on {dataset.n} samples")
    if ridge < 0:
        raise DataError(f"ridge must be >= 0, got {ridge}")
    if restarts < 1:
        raise DataError(f"restarts must be >= 1, got {restarts}")
    if np.unique(dataset.labels).size < 2:
        raise DataError("training data must contain at least 2 classes")
    targets = one_hot(dataset.labels, dataset.k)

    best = None
    for restart in range(restarts):
        params, errors, objective = _fit_once_rbf(
            dataset.features, targets, dataset.labels, m, seed + restart, ridge)
        key = (errors, objective, restart)
        if best is None or key < best[0]:
            best = (key, params)
    (errors, objective, restart), params = best
    confusion = confusion_matrix(rbf_forward(params, dataset.features),
                                 dataset.labels, dataset.k)
    report = FitReport(errors, confusion, objective, restart, np.array([objective]))
    return params, report


def model_to_doc(params, config: dict | None = None) -> dict:
    """JSON-ready document; float arrays flattened row-major. json's repr
    floats round-trip bit-exactly."""
    if isinstance(params, MlpParams):
        d, h, k = params.dims
        doc = {"type": "mlp", "d": d, "h": h, "k": k,
               "w1": params.w1.ravel().tolist(), "b1": params.b1.tolist(),
               "w2": params.w2.ravel().tolist(), "b2": params.b2.tolist()}
    elif isinstance(params, RbfParams):
        d, m, k = params.dims
        doc = {"type": "rbf", "d": d, "m": m, "k": k, "width": params.width,
               "centers": params.centers.ravel().tolist(),
               "w": params.w.ravel().tolist(), "b": params.b.tolist()}
    else:
        raise DataError(f"cannot serialize {type(params).__name__}")
    doc["config"] = dict(config) if config else {}
    return doc


def model_from_doc(doc: dict):
    """Inverse of model_to_doc; returns MlpParams or RbfParams."""
    try:
        kind = doc["type"]
        if kind == "mlp":
            d, h, k = int(doc["d"]), int(doc["h"]), int(doc["k"])
            return MlpParams(np.array(doc["w1"]).reshape(d, h), np.array(doc["b1"]),
                             np.array(doc["w2"]).reshape(h, k), np.array(doc["b2"]))
        if kind == "rbf":
            d, m, k = int(doc["d"]), int(doc["m"]), int(doc["k"])
            return RbfParams(np.array(doc["centers"]).reshape(m, d), float(doc["width"]),
                             np.array(doc["w"]).reshape(m, k), np.array(doc["b"]))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed model document: {exc}") from exc
    raise DataError(f"unknown model type {doc.get('type')!r}")


def forward(params, x) -> OutputMatrix:
    """Dispatch on parameter type."""
    if isinstance(params, MlpParams):
        return mlp_forward(params, x)
    if isinstance(params, RbfParams):
        return rbf_forward(params, x)
    raise DataError(f"cannot run forward pass for {type(params).__name__}")
