"""Pydantic request/response models for the HTTP service.

Everything crosses the wire as JSON: datasets as row-major float lists,
models as the same JSON documents the library persists, points in the
{"k", "points": [{x, y, class, kind, source}]} schema the CLI writes.
"""

from typing import Literal

from pydantic import BaseModel, Field


class DatasetPayload(BaseModel):
    features: list[list[float]]
    labels: list[int]
    class_names: list[str] | None = None


class HealthResponse(BaseModel):
    status: str
    version: str


class ScenarioInfo(BaseModel):
    name: str
    dataset: str


class ScenarioListResponse(BaseModel):
    scenarios: list[ScenarioInfo]


class ProjectionRequest(BaseModel):
    k: int


class ProjectionResponse(BaseModel):
    k: int
    vertices: list[list[float]]
    center: list[float]
    matrix_a: list[list[float]]
    offset_b: list[float]


class TrainRequest(BaseModel):
    dataset: DatasetPayload
    model: Literal["mlp", "rbf"] = "mlp"
    hidden: int = 3
    centers: int = 6
    alpha: float = 0.0
    iterations: int = 100
    restarts: int = 1
    seed: int = 0
    error_fn: Literal["cross-entropy", "sum-of-squares"] = "cross-entropy"
    ridge: float = 1e-8
    standardize: bool = True


class FitReportPayload(BaseModel):
    training_errors: int
    confusion: list[list[int]]
    final_objective: float
    chosen_restart: int
    objective_trace: list[float]


class TrainResponse(BaseModel):
    model: dict
    report: FitReportPayload


class PointPayload(BaseModel):
    x: float
    y: float
    class_label: int = Field(alias="class")
    kind: str
    source: int

    model_config = {"populate_by_name": True}


class PointsDoc(BaseModel):
    k: int
    points: list[PointPayload]


class ProjectRequest(BaseModel):
    """Either post ready-made outputs, or a model plus raw features."""

    outputs: list[list[float]] | None = None
    labels: list[int]
    model: dict | None = None
    features: list[list[float]] | None = None
    kind: Literal["train", "test", "perturbed", "new"] = "train"
    source_indices: list[int] | None = None


class PerturbRequest(BaseModel):
    dataset: DatasetPayload
    fraction: float
    per_point: int = 1
    seed: int = 0
    selection: list[int] | None = None


class PerturbResponse(BaseModel):
    dataset: DatasetPayload
    sources: list[int]


class SegmentSpec(BaseModel):
    start: list[float]  # output-space K-vectors
    end: list[float]


class RenderRequest(BaseModel):
    k: int
    layers: list[PointsDoc] | None = None
    points: list[PointPayload] | None = None
    edges: bool = True
    hull: bool = False
    segments: list[SegmentSpec] = Field(default_factory=list)
    vertex_labels: bool = True
    class_names: list[str] | None = None
    mono: bool = False
    width: int = 560
    height: int = 560
    margin: int = 40


class RenderResponse(BaseModel):
    svg: str


class ReportRequest(BaseModel):
    model: dict
    dataset: DatasetPayload
    threshold: float | None = None


class ReliabilityRequest(BaseModel):
    k: int
    training: PointsDoc
    new_output: list[float]
    neighbors: int = 10


class ReliabilityResponse(BaseModel):
    image: list[float]
    vertex_distances: list[float]
    centroid_distances: list[float | None]
    knn_agreement: float


class ReproduceRequest(BaseModel):
    scenario: str
    dataset: DatasetPayload
    seed: int = 1


class ReproduceResponse(BaseModel):
    files: dict[str, str]
    manifest: dict
