"""Scenario pipelines that regenerate the reference figure families.

Each scenario trains the configured networks on a benchmark dataset with
fixed seeds, projects the outputs and renders SVG scatterograms, returning
an ordered filename -> content map plus a manifest (command echo, seeds,
dataset fingerprint, emitted models, metric summary and a sha256 per
artifact). Everything downstream of the seed is deterministic, so running
a scenario twice yields byte-identical files.
"""

import hashlib
import json

import numpy as np

from . import models
from .analysis import correct_mask, threshold_filter, vertex_concentration
from .data import Dataset, dataset_fingerprint
from .errors import DataError
from .geometry import ImagePoint, build_projection, project
from .models import TrainConfig, mlp_train, rbf_train
from .perturb import PerturbationSpec, perturb_dataset, standardize_dataset
from .render import Layer, Scene, render_svg

# threshold ladder reported by build_report alongside any requested value
REPORT_THETAS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0)


def points_to_doc(points, k: int) -> dict:
    return {"k": int(k),
            "points": [{"x": p.x, "y": p.y, "class": p.class_label,
                        "kind": p.kind, "source": p.source_index}
                       for p in points]}


def points_from_doc(doc: dict):
    try:
        k = int(doc["k"])
        points = [ImagePoint(float(p["x"]), float(p["y"]), int(p["class"]),
                             str(p["kind"]), int(p["source"]))
                  for p in doc["points"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed points document: {exc}") from exc
    return k, points


def stable_json(doc) -> str:
    """Compact JSON with insertion-order keys; used for every emitted file."""
    return json.dumps(doc, indent=1) + "\n"


def build_report(params, dataset: Dataset, theta: float | None = None,
                 kind: str = "train") -> dict:
    """Error counts, confusion, vertex concentration and a threshold sweep."""
    outputs = models.forward(params, dataset.features)
    k = outputs.k
    errors = models.count_errors(outputs, dataset.labels)
    confusion = models.confusion_matrix(outputs, dataset.labels, k)

    concentration = {"per_class": None, "overall": None}
    if k >= 3:
        pmap = build_projection(k)
        points = project(pmap, outputs, dataset.labels, kind)
        per_class, overall = vertex_concentration(
            points, pmap, correct_mask(outputs, dataset.labels))
        concentration = {"per_class": per_class, "overall": overall}

    thetas = sorted(set(REPORT_THETAS) | ({float(theta)} if theta is not None else set()))
    table = []
    for th in thetas:
        _, kept, kept_errors = threshold_filter(outputs, dataset.labels, th)
        table.append({"theta": th, "kept": kept, "errors_among_kept": kept_errors})

    return {"samples": dataset.n, "errors": errors,
            "confusion": confusion.astype(int).tolist(),
            "concentration": concentration, "threshold_table": table}


def _all_restarts_mlp(dataset: Dataset, config: TrainConfig):
    """Every restart's (errors, final objective, index, params); mlp_train
    keeps only the winner, the convergence scenario needs best AND worst."""
    targets = models.one_hot(dataset.labels, dataset.k)
    fits = []
    for restart in range(config.restarts):
        params, errors, trace = models._fit_once_mlp(
            dataset.features, targets, dataset.labels, config, restart)
        fits.append(((errors, float(trace[-1]), restart), params))
    return fits


def _train_scene(pmap, params, dataset: Dataset, extra_layers=(), **scene_kw):
    outputs = models.forward(params, dataset.features)
    points = project(pmap, outputs, dataset.labels, "train")
    layers = [Layer(points, "train")] + list(extra_layers)
    return Scene(pmap=pmap, layers=layers,
                 class_names=dataset.class_names, **scene_kw)


def _perturbed_layer(pmap, params, dataset: Dataset, spec: PerturbationSpec):
    replicas, src = perturb_dataset(dataset, spec)
    outputs = models.forward(params, replicas.features)
    points = project(pmap, outputs, replicas.labels, "perturbed", source_indices=src)
    return Layer(points, "perturbed")


def _scenario_conv(wine: Dataset, seed: int):
    data = standardize_dataset(wine)
    pmap = build_projection(data.k)
    files, metrics = {}, {}
    for iters in (5, 10, 30):
        config = TrainConfig(hidden_units=3, iterations=iters, alpha=0.0,
                             restarts=20, seed=seed)
        fits = _all_restarts_mlp(data, config)
        best_key, best_params = min(fits, key=lambda f: f[0])
        worst_key, worst_params = max(fits, key=lambda f: f[0])
        for tag, key, params in (("best", best_key, best_params),
                                 ("worst", worst_key, worst_params)):
            scene = _train_scene(pmap, params, data)
            files[f"conv_iter{iters:02d}_{tag}.svg"] = render_svg(scene)
            metrics[f"iter{iters:02d}_{tag}_errors"] = key[0]
    return files, metrics, []


def _scenario_underfit(wine: Dataset, seed: int):
    data = standardize_dataset(wine)
    pmap = build_projection(data.k)
    config = TrainConfig(hidden_units=1, iterations=200, alpha=0.0,
                         restarts=20, seed=seed)
    fits = _all_restarts_mlp(data, config)
    best_key, best_params = min(fits, key=lambda f: f[0])
    worst_key, worst_params = max(fits, key=lambda f: f[0])
    files = {"underfit_best.svg": render_svg(_train_scene(pmap, best_params, data)),
             "underfit_worst.svg": render_svg(_train_scene(pmap, worst_params, data))}
    metrics = {"best_errors": best_key[0], "worst_errors": worst_key[0]}
    return files, metrics, []


def _scenario_overfit(wine: Dataset, seed: int):
    from .data import split

    data = standardize_dataset(wine)
    train, test = split(data, 2.0 / 3.0, seed)
    params, report = mlp_train(train, TrainConfig(
        hidden_units=30, iterations=100, alpha=0.0, restarts=5, seed=seed))
    pmap = build_projection(data.k)

    test_points = project(pmap, models.forward(params, test.features),
                          test.labels, "test")
    clean = _train_scene(pmap, params, train,
                         extra_layers=[Layer(test_points, "test")])
    spec = PerturbationSpec(fraction=0.02, per_point=5, seed=seed)
    noisy = _train_scene(pmap, params, train,
                         extra_layers=[Layer(test_points, "test"),
                                       _perturbed_layer(pmap, params, train, spec)])
    files = {"overfit_clean.svg": render_svg(clean),
             "overfit_perturbed.svg": render_svg(noisy)}
    test_errors = models.count_errors(models.forward(params, test.features), test.labels)
    metrics = {"train_errors": report.training_errors, "test_errors": test_errors}
    model_doc = models.model_to_doc(params, {"scenario": "overfit", "seed": seed})
    return files, metrics, [("overfit_model.json", model_doc)]


def _scenario_regsweep(wine: Dataset, seed: int):
    data = standardize_dataset(wine)
    pmap = build_projection(data.k)
    files, metrics, model_files = {}, {}, []
    for alpha in (0.0, 0.05, 1.0, 5.0):
        params, report = mlp_train(data, TrainConfig(
            hidden_units=3, iterations=200, alpha=alpha, restarts=5, seed=seed))
        tag = f"alpha{alpha:g}".replace(".", "p")
        files[f"regsweep_{tag}_clean.svg"] = render_svg(_train_scene(pmap, params, data))
        spec = PerturbationSpec(fraction=0.05, per_point=3, seed=seed)
        noisy = _train_scene(pmap, params, data,
                             extra_layers=[_perturbed_layer(pmap, params, data, spec)])
        files[f"regsweep_{tag}_noise5.svg"] = render_svg(noisy)
        outputs = models.forward(params, data.features)
        points = project(pmap, outputs, data.labels, "train")
        _, overall = vertex_concentration(points, pmap,
                                          correct_mask(outputs, data.labels))
        metrics[f"{tag}_errors"] = report.training_errors
        metrics[f"{tag}_concentration"] = overall
        model_files.append((f"regsweep_{tag}_model.json",
                            models.model_to_doc(params, {"alpha": alpha, "seed": seed})))
    return files, metrics, model_files


def _scenario_rbf_vs_mlp(wine: Dataset, seed: int):
    data = standardize_dataset(wine)
    pmap = build_projection(data.k)
    rbf_params, rbf_report = rbf_train(data, m=6, seed=seed, restarts=10)
    mlp_params, mlp_report = mlp_train(data, TrainConfig(
        hidden_units=6, iterations=100, alpha=0.1, restarts=10, seed=seed))

    small = PerturbationSpec(fraction=0.02, per_point=3, seed=seed)
    strong = PerturbationSpec(fraction=0.15, per_point=3, seed=seed)
    files = {
        "rbf_clean.svg": render_svg(_train_scene(pmap, rbf_params, data)),
        "rbf_noise2.svg": render_svg(_train_scene(
            pmap, rbf_params, data,
            extra_layers=[_perturbed_layer(pmap, rbf_params, data, small)])),
        "rbf_noise15.svg": render_svg(_train_scene(
            pmap, rbf_params, data,
            extra_layers=[_perturbed_layer(pmap, rbf_params, data, strong)])),
        "mlp_noise15.svg": render_svg(_train_scene(
            pmap, mlp_params, data,
            extra_layers=[_perturbed_layer(pmap, mlp_params, data, strong)])),
    }
    metrics = {"rbf_errors": rbf_report.training_errors,
               "mlp_errors": mlp_report.training_errors}
    model_files = [("rbf_model.json", models.model_to_doc(rbf_params, {"m": 6, "seed": seed})),
                   ("mlp_model.json", models.model_to_doc(mlp_params, {"alpha": 0.1, "seed": seed}))]
    return files, metrics, model_files


def _scenario_satimage(satimage: Dataset, seed: int):
    data = standardize_dataset(satimage)
    params, report = mlp_train(data, TrainConfig(
        hidden_units=30, iterations=100, alpha=0.05, restarts=1, seed=seed))
    pmap = build_projection(data.k)

    # one source vector per class, 100 replicas each at 3% noise
    selection = tuple(int(np.flatnonzero(data.labels == cls)[0])
                      for cls in range(data.k))
    spec = PerturbationSpec(fraction=0.03, per_point=100, seed=seed,
                            selection=selection)
    files = {
        "satimage_clean.svg": render_svg(_train_scene(pmap, params, data)),
        "satimage_perturbed.svg": render_svg(_train_scene(
            pmap, params, data,
            extra_layers=[_perturbed_layer(pmap, params, data, spec)])),
    }
    accuracy = 1.0 - report.training_errors / data.n
    metrics = {"train_errors": report.training_errors,
               "train_accuracy": accuracy,
               "confusion": report.confusion.astype(int).tolist()}
    model_doc = models.model_to_doc(params, {"scenario": "satimage", "seed": seed})
    return files, metrics, [("satimage_model.json", model_doc)]


SCENARIOS = {
    "conv": ("wine", _scenario_conv),
    "underfit": ("wine", _scenario_underfit),
    "overfit": ("wine", _scenario_overfit),
    "regsweep": ("wine", _scenario_regsweep),
    "rbf-vs-mlp": ("wine", _scenario_rbf_vs_mlp),
    "satimage": ("satimage", _scenario_satimage),
}


def scenario_dataset_name(name: str) -> str:
    if name not in SCENARIOS:
        raise DataError(f"unknown scenario {name!r}; valid: {', '.join(sorted(SCENARIOS))}")
    return SCENARIOS[name][0]


def run_scenario(name: str, dataset: Dataset, seed: int = 1):
    """Run one scenario; returns (files, manifest).

    files maps filename -> text content (SVGs, model JSONs, metrics.json).
    The manifest lists every artifact with its sha256.
    """
    if name not in SCENARIOS:
        raise DataError(f"unknown scenario {name!r}; valid: {', '.join(sorted(SCENARIOS))}")
    _, fn = SCENARIOS[name]
    svg_files, metrics, model_files = fn(dataset, seed)

    files = dict(svg_files)
    model_names = []
    for fname, doc in model_files:
        files[fname] = stable_json(doc)
        model_names.append(fname)
    files["metrics.json"] = stable_json(metrics)

    manifest = {
        "command": f"reproduce {name} --seed {seed}",
        "scenario": name,
        "seed": seed,
        "dataset_fingerprint": dataset_fingerprint(dataset),
        "models": model_names,
        "metrics": metrics,
        "artifacts": {fname: hashlib.sha256(content.encode()).hexdigest()
                      for fname, content in files.items()},
    }
    return files, manifest
