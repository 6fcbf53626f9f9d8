"""Affine projection of K-dimensional classifier outputs onto a regular polygon.

A K-class classifier maps an input vector to K activations o = (o_1..o_K).
The projection sends each one-hot corner e_j of the output hypercube to
vertex j of a regular polygon with unit edge, and the all-ones point to the
polygon center S, so scatter plots of projected outputs ("images") show how
close every sample sits to its class target.

Vertex coordinates, with vertex 0 pinned at the origin:

    phi = -pi/2 - pi/K
    r   = 1 / (2 cos(pi/2 - pi/K))          (circumradius)
    x_j = 1/2 + r cos(phi + 2 pi j / K)
    y_j = 1/2 tan(pi/2 - pi/K) + r sin(phi + 2 pi j / K)

The center is S = (1/2, 1/2 tan(pi/2 - pi/K)). The affine map x = A o + B
is fixed by 2K+2 linear equations (K vertex images plus the center image);
its closed-form solution is B = S and A[:, j] = vertex_j - S.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DataError, ResourceError, ShapeError, VizError

POINT_KINDS = ("train", "test", "perturbed", "new")

# Solver must agree with the closed form to this tolerance; a miss means the
# linear system assembly is broken, not that the input was bad.
_CLOSED_FORM_TOL = 1e-10

_HULL_MAX_CLASSES = 20  # 2^K binary corners; guard at 2^20


@dataclass(frozen=True)
class PolygonMap:
    """Affine map from K-dimensional outputs to the plane.

    matrix_a is 2xK and offset_b is length 2, so an output row o projects to
    matrix_a @ o + offset_b. vertices holds the K polygon corners (Kx2) and
    center the common image of all constant output vectors.
    """

    k: int
    vertices: np.ndarray
    center: np.ndarray
    matrix_a: np.ndarray
    offset_b: np.ndarray


@dataclass(frozen=True)
class OutputMatrix:
    """N x K activations produced by a classifier.

    bounded is True iff every entry lies in [0, 1]; sigmoid-output models
    guarantee it, linear-output models (RBF) may not.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ShapeError(f"output matrix must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("output matrix contains non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def bounded(self) -> bool:
        return bool(np.all((self.values >= 0.0) & (self.values <= 1.0)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ImagePoint:
    """A projected 2-D point tagged with its class and provenance."""

    x: float
    y: float
    class_label: int
    kind: str
    source_index: int


def polygon_vertices(k: int) -> np.ndarray:
    """Vertices (Kx2) of the regular unit-edge polygon, vertex 0 at the origin.

    k=2 is rejected: the formula degenerates to a collinear segment, and the
    two-class case uses the identity square view instead (square_view).
    """
    if k < 3:
        raise DataError(f"polygon projection needs at least 3 classes, got k={k}")
    half = math.pi / 2 - math.pi / k
    phi = -math.pi / 2 - math.pi / k
    r = 1.0 / (2.0 * math.cos(half))
    j = np.arange(k)
    angles = phi + 2.0 * math.pi * j / k
    x = 0.5 + r * np.cos(angles)
    y = 0.5 * math.tan(half) + r * np.sin(angles)
    return np.column_stack([x, y])


def polygon_center(k: int) -> np.ndarray:
    """Common image (1/2, 1/2 tan(pi/2 - pi/K)) of all constant outputs."""
    if k < 3:
        raise DataError(f"polygon projection needs at least 3 classes, got k={k}")
    return np.array([0.5, 0.5 * math.tan(math.pi / 2 - math.pi / k)])


def build_projection(k: int) -> PolygonMap:
    """Solve the 2K+2 equation system for the affine map and validate it.

    Unknowns are the 2xK matrix A and offset B. Equations: A e_j + B must hit
    vertex j (2K of them) and A 1 + B must hit the center (2 more). The x and
    y coordinates decouple into two (K+1)-variable systems sharing the same
    design matrix. The numeric solution is cross-checked against the closed
    form B = S, A[:, j] = v_j - S; disagreement raises (internal invariant).
    """
    vertices = polygon_vertices(k)
    center = polygon_center(k)

    design = np.zeros((k + 1, k + 1))
    design[:k, :k] = np.eye(k)
    design[:k, k] = 1.0
    design[k, :] = 1.0
    rhs = np.vstack([vertices, center])  # (K+1) x 2
    try:
        solution = np.linalg.solve(design, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for k >= 3
        raise VizError(f"projection system singular for k={k}") from exc

    matrix_a = solution[:k, :].T.copy()
    offset_b = solution[k, :].copy()

    closed_a = (vertices - center).T
    if (np.max(np.abs(matrix_a - closed_a)) > _CLOSED_FORM_TOL
            or np.max(np.abs(offset_b - center)) > _CLOSED_FORM_TOL):
        raise VizError(f"solved projection deviates from closed form for k={k}")

    return PolygonMap(k=k, vertices=vertices, center=center,
                      matrix_a=matrix_a, offset_b=offset_b)


def _as_output_values(outputs) -> np.ndarray:
    if isinstance(outputs, OutputMatrix):
        return outputs.values
    return OutputMatrix(np.asarray(outputs, dtype=float)).values


def project(pmap: PolygonMap, outputs, labels, kind: str,
            source_indices=None) -> list[ImagePoint]:
    """Project output rows through x = A o + B.

    labels gives the true class per row; source_indices defaults to the row
    index and records which original sample each point came from (perturbed
    replicas point back at their source row).
    """
    values = _as_output_values(outputs)
    if values.shape[1] != pmap.k:
        raise ShapeError(
            f"outputs have {values.shape[1]} columns, map expects {pmap.k}")
    return _make_points(values @ pmap.matrix_a.T + pmap.offset_b,
                        values.shape[0], pmap.k, labels, kind, source_indices)


def square_view(outputs, labels, kind: str, source_indices=None) -> list[ImagePoint]:
    """Two-class identity view: point = (o_1, o_2).

    Corners (1,0)/(0,1) are the class targets, (0,0) the unrecognized region
    and (1,1) the overlap region.
    """
    values = _as_output_values(outputs)
    if values.shape[1] != 2:
        raise ShapeError(f"square view needs exactly 2 columns, got {values.shape[1]}")
    return _make_points(values, values.shape[0], 2, labels, kind, source_indices)


def _make_points(plane, n, k, labels, kind, source_indices) -> list[ImagePoint]:
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
    if np.any((labels < 0) | (labels >= k)):
        raise DataError(f"labels must lie in [0, {k})")
    if kind not in POINT_KINDS:
        raise DataError(f"unknown point kind {kind!r}, expected one of {POINT_KINDS}")
    if source_indices is None:
        source_indices = np.arange(n)
    else:
        source_indices = np.asarray(source_indices, dtype=int)
        if source_indices.shape != (n,):
            raise ShapeError(f"expected {n} source indices, got shape {source_indices.shape}")
    return [ImagePoint(float(px), float(py), int(lab), kind, int(src))
            for (px, py), lab, src in zip(plane, labels, source_indices)]


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull with collinear points dropped.

    Points are sorted lexicographically, so the returned hull starts at the
    lowest (x, y) point and runs counterclockwise. Deterministic for
    snapshot tests.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def binary_hull(pmap: PolygonMap) -> np.ndarray:
    """Convex hull of the images of all 2^K binary output vectors.

    Every bounded output (all entries in [0,1]) projects inside this region;
    for K=3 it is the hexagon spanned by the six mixed binary corners (the
    all-zero and all-one corners land on the center, strictly inside).
    """
    if pmap.k > _HULL_MAX_CLASSES:
        raise ResourceError(
            f"binary hull needs 2^{pmap.k} corners; limit is 2^{_HULL_MAX_CLASSES}")
    corners = np.array(
        [[(i >> j) & 1 for j in range(pmap.k)] for i in range(2 ** pmap.k)],
        dtype=float)
    images = corners @ pmap.matrix_a.T + pmap.offset_b
    return convex_hull(images)


def characteristic_segment(pmap: PolygonMap, o_start, o_end) -> np.ndarray:
    """Planar segment (2x2: rows start/end) that an output-space segment maps to.

    Affinity makes the image of the whole segment exactly the segment between
    the projected endpoints, e.g. (a,0,0) for a in [0,1] runs from the center
    to vertex 0.
    """
    o_start = np.asarray(o_start, dtype=float)
    o_end = np.asarray(o_end, dtype=float)
    if o_start.shape != (pmap.k,) or o_end.shape != (pmap.k,):
        raise ShapeError(f"segment endpoints must be length-{pmap.k} vectors")
    ends = np.vstack([o_start, o_end])
    return ends @ pmap.matrix_a.T + pmap.offset_b


def hull_contains(hull: np.ndarray, point, tol: float = 1e-9) -> bool:
    """True if point lies inside the counterclockwise convex hull (tol margin)."""
    point = np.asarray(point, dtype=float)
    n = len(hull)
    for i in range(n):
        a = hull[i]
        b = hull[(i + 1) % n]
        cross = (b[0] - a[0]) * (point[1] - a[1]) - (b[1] - a[1]) * (point[0] - a[0])
        if cross < -tol:
            return False
    return True
