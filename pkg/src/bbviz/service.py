"""FastAPI service exposing the projection, training and rendering pipeline.

The service is stateless: datasets, models and points travel inside request
bodies, results come back as JSON (SVG as text), so any client that can
produce classifier outputs can get scatterograms back. File I/O stays with
the caller; the bundled CLI is one such client.
"""

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__, models, schemas
from .analysis import reliability
from .data import Dataset
from .errors import DataError, OptimizationError, VizError
from .geometry import (OutputMatrix, build_projection, binary_hull,
                       characteristic_segment, project, square_view)
from .models import TrainConfig, mlp_train, model_from_doc, model_to_doc, rbf_train
from .perturb import PerturbationSpec, gaussian_perturb, standardize
from .pipelines import (SCENARIOS, build_report, points_from_doc, points_to_doc,
                        run_scenario)
from .render import Layer, Scene, render_svg


def _payload_dataset(payload: schemas.DatasetPayload) -> Dataset:
    features = np.asarray(payload.features, dtype=float)
    labels = np.asarray(payload.labels, dtype=int)
    names = payload.class_names
    if names is None:
        k = int(labels.max()) + 1 if labels.size else 0
        names = [f"class-{i}" for i in range(k)]
    return Dataset(features, labels, tuple(names))


def _standardize_features(doc: dict, features: np.ndarray) -> np.ndarray:
    """Apply the standardization echoed in a model document, if any."""
    stats = (doc.get("config") or {}).get("standardization")
    if not stats:
        return features
    mean = np.asarray(stats["mean"], dtype=float)
    std = np.asarray(stats["std"], dtype=float)
    return (features - mean) / std


def _model_outputs(doc: dict, features) -> OutputMatrix:
    params = model_from_doc(doc)
    features = _standardize_features(doc, np.asarray(features, dtype=float))
    return models.forward(params, features)


def create_app() -> FastAPI:
    app = FastAPI(title="bbviz", version=__version__,
                  description="Polygon scatterograms of classifier outputs")

    @app.exception_handler(DataError)
    def _data_error(request, exc):
        return JSONResponse(status_code=400,
                            content={"detail": {"kind": "data", "message": str(exc)}})

    @app.exception_handler(OptimizationError)
    def _optim_error(request, exc):
        return JSONResponse(status_code=500,
                            content={"detail": {"kind": "optimization", "message": str(exc)}})

    @app.exception_handler(VizError)
    def _viz_error(request, exc):
        return JSONResponse(status_code=500,
                            content={"detail": {"kind": "internal", "message": str(exc)}})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/scenarios", response_model=schemas.ScenarioListResponse)
    def scenarios():
        infos = [schemas.ScenarioInfo(name=name, dataset=dataset)
                 for name, (dataset, _) in sorted(SCENARIOS.items())]
        return schemas.ScenarioListResponse(scenarios=infos)

    @app.post("/projection", response_model=schemas.ProjectionResponse)
    def projection(req: schemas.ProjectionRequest):
        pmap = build_projection(req.k)
        return schemas.ProjectionResponse(
            k=pmap.k, vertices=pmap.vertices.tolist(), center=pmap.center.tolist(),
            matrix_a=pmap.matrix_a.tolist(), offset_b=pmap.offset_b.tolist())

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        dataset = _payload_dataset(req.dataset)
        config_echo = {"seed": req.seed, "restarts": req.restarts}
        if req.standardize:
            from .perturb import standardize_dataset
            scaled = standardize_dataset(dataset)
            stats = scaled.standardization
            config_echo["standardization"] = {"mean": stats.mean.tolist(),
                                              "std": stats.std.tolist()}
            dataset = scaled
        if req.model == "mlp":
            config = TrainConfig(hidden_units=req.hidden, iterations=req.iterations,
                                 alpha=req.alpha, restarts=req.restarts,
                                 seed=req.seed, error_fn=req.error_fn)
            params, report = mlp_train(dataset, config)
            config_echo.update(hidden=req.hidden, iterations=req.iterations,
                               alpha=req.alpha, error_fn=req.error_fn)
        else:
            params, report = rbf_train(dataset, m=req.centers, seed=req.seed,
                                       ridge=req.ridge, restarts=req.restarts)
            config_echo.update(centers=req.centers, ridge=req.ridge)
        return schemas.TrainResponse(model=model_to_doc(params, config_echo),
                                     report=schemas.FitReportPayload(**report.to_doc()))

    @app.post("/project", response_model=schemas.PointsDoc)
    def project_points(req: schemas.ProjectRequest):
        if req.outputs is not None:
            outputs = OutputMatrix(np.asarray(req.outputs, dtype=float))
        elif req.model is not None and req.features is not None:
            outputs = _model_outputs(req.model, req.features)
        else:
            raise DataError("post either outputs, or model plus features")
        if outputs.k == 2:
            points = square_view(outputs, req.labels, req.kind, req.source_indices)
        else:
            pmap = build_projection(outputs.k)
            points = project(pmap, outputs, req.labels, req.kind, req.source_indices)
        return schemas.PointsDoc(**points_to_doc(points, outputs.k))

    @app.post("/perturb", response_model=schemas.PerturbResponse)
    def perturb(req: schemas.PerturbRequest):
        dataset = _payload_dataset(req.dataset)
        scaled, stats = standardize(dataset.features)
        spec = PerturbationSpec(fraction=req.fraction, per_point=req.per_point,
                                seed=req.seed,
                                selection=None if req.selection is None
                                else tuple(req.selection))
        noisy, labels, sources = gaussian_perturb(scaled, dataset.labels, spec)
        restored = noisy * stats.std + stats.mean  # back to original units
        payload = schemas.DatasetPayload(features=restored.tolist(),
                                         labels=[int(l) for l in labels],
                                         class_names=list(dataset.class_names))
        return schemas.PerturbResponse(dataset=payload,
                                       sources=[int(s) for s in sources])

    @app.post("/render", response_model=schemas.RenderResponse)
    def render(req: schemas.RenderRequest):
        if req.k == 2:
            pmap = None
        else:
            pmap = build_projection(req.k)
        layers = []
        docs = req.layers if req.layers is not None else []
        if req.points is not None:
            docs = [schemas.PointsDoc(k=req.k, points=req.points)] + list(docs)
        for doc in docs:
            _, pts = points_from_doc(doc.model_dump(by_alias=True))
            kind = pts[0].kind if pts else "train"
            layers.append(Layer(pts, kind))
        hull = None
        segments = []
        if pmap is not None:
            if req.hull:
                hull = binary_hull(pmap)
            segments = [characteristic_segment(pmap, seg.start, seg.end)
                        for seg in req.segments]
        scene = Scene(pmap=pmap, layers=layers, edges=req.edges, hull=hull,
                      segments=segments, vertex_labels=req.vertex_labels,
                      class_names=tuple(req.class_names) if req.class_names else None,
                      mono=req.mono)
        return schemas.RenderResponse(
            svg=render_svg(scene, width=req.width, height=req.height, margin=req.margin))

    @app.post("/report")
    def report(req: schemas.ReportRequest):
        dataset = _payload_dataset(req.dataset)
        params = model_from_doc(req.model)
        features = _standardize_features(req.model, dataset.features)
        scaled = Dataset(features, dataset.labels, dataset.class_names)
        return build_report(params, scaled, theta=req.threshold)

    @app.post("/reliability", response_model=schemas.ReliabilityResponse)
    def reliability_endpoint(req: schemas.ReliabilityRequest):
        pmap = build_projection(req.k)
        _, training = points_from_doc(req.training.model_dump(by_alias=True))
        rep = reliability(pmap, training, np.asarray(req.new_output, dtype=float),
                          k=req.neighbors)
        doc = rep.to_doc()
        return schemas.ReliabilityResponse(**doc)

    @app.post("/reproduce", response_model=schemas.ReproduceResponse)
    def reproduce(req: schemas.ReproduceRequest):
        dataset = _payload_dataset(req.dataset)
        files, manifest = run_scenario(req.scenario, dataset, seed=req.seed)
        return schemas.ReproduceResponse(files=files, manifest=manifest)

    return app


app = create_app()
