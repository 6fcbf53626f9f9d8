"""Quantitative readouts of scatterograms.

Concentration measures how tightly training images cluster at their class
vertices: low values mean an overconfident network (images collapsed onto
the corners), larger values a softer, wider-margin mapping. Reliability
places one new output among the training images; the threshold filter keeps
only samples whose winning activation clears a confidence floor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ShapeError
from .geometry import ImagePoint, OutputMatrix, PolygonMap


@dataclass(frozen=True)
class ReliabilityReport:
    """Where a new output lands relative to the training scatter."""

    image: tuple
    vertex_distances: tuple
    centroid_distances: tuple  # None for classes with no training points
    knn_agreement: float

    def to_doc(self) -> dict:
        return {
            "image": [float(self.image[0]), float(self.image[1])],
            "vertex_distances": [float(v) for v in self.vertex_distances],
            "centroid_distances": [None if v is None else float(v)
                                   for v in self.centroid_distances],
            "knn_agreement": float(self.knn_agreement),
        }


def _points_xy(points) -> np.ndarray:
    return np.array([[p.x, p.y] for p in points])


def vertex_concentration(points, pmap: PolygonMap, correct=None):
    """Mean distance of (correctly classified) training images to their class
    vertex, per class and overall.

    correct is an optional boolean mask aligned with points; pass the argmax
    agreement of the generating outputs to restrict the mean to correctly
    classified samples (None keeps every point). Classes with no contributing
    points report None.

    Returns (per_class, overall) where per_class is a list of length K.
    """
    if not points:
        raise DataError("vertex_concentration needs at least one point")
    if correct is not None and len(correct) != len(points):
        raise ShapeError("correct mask and points disagree on length")
    xy = _points_xy(points)
    labels = np.array([p.class_label for p in points])
    if np.any(labels >= pmap.k):
        raise DataError(f"point class exceeds map classes ({pmap.k})")
    keep = np.ones(len(points), dtype=bool) if correct is None else np.asarray(correct, dtype=bool)

    distances = np.linalg.norm(xy - pmap.vertices[labels], axis=1)
    per_class = []
    for cls in range(pmap.k):
        mask = keep & (labels == cls)
        per_class.append(float(distances[mask].mean()) if mask.any() else None)
    overall = float(distances[keep].mean()) if keep.any() else None
    return per_class, overall


def reliability(pmap: PolygonMap, training_points, new_output, k: int = 10) -> ReliabilityReport:
    """Relate the image of one new output vector to the training images.

    knn_agreement is the fraction of the k nearest training images (distance
    ties broken by source index) whose class equals the argmax class of the
    new output.
    """
    if not training_points:
        raise DataError("reliability needs a nonempty training set")
    if not 1 <= k <= len(training_points):
        raise DataError(f"need 1 <= k <= {len(training_points)}, got {k}")
    new_output = np.asarray(new_output, dtype=float)
    if new_output.shape != (pmap.k,):
        raise ShapeError(f"new output must be a length-{pmap.k} vector")

    image = pmap.matrix_a @ new_output + pmap.offset_b
    vertex_distances = np.linalg.norm(pmap.vertices - image, axis=1)

    xy = _points_xy(training_points)
    labels = np.array([p.class_label for p in training_points])
    centroid_distances = []
    for cls in range(pmap.k):
        mask = labels == cls
        if mask.any():
            centroid = xy[mask].mean(axis=0)
            centroid_distances.append(float(np.linalg.norm(centroid - image)))
        else:
            centroid_distances.append(None)

    predicted = int(np.argmax(new_output))
    dist = np.linalg.norm(xy - image, axis=1)
    order = sorted(range(len(training_points)),
                   key=lambda i: (dist[i], training_points[i].source_index))
    neighbors = order[:k]
    agreement = float(np.mean(labels[neighbors] == predicted))

    return ReliabilityReport(
        image=(float(image[0]), float(image[1])),
        vertex_distances=tuple(float(v) for v in vertex_distances),
        centroid_distances=tuple(centroid_distances),
        knn_agreement=agreement,
    )


def threshold_filter(outputs, labels, theta: float):
    """Keep rows whose maximal output reaches theta.

    Returns (kept_indices, kept_count, errors_among_kept). theta=0 keeps
    everything; theta=1 keeps only rows with a maximal output of exactly 1.
    Monotone: raising theta never adds rows.
    """
    if not 0.0 <= theta <= 1.0:
        raise DataError(f"threshold must lie in [0, 1], got {theta}")
    values = outputs.values if isinstance(outputs, OutputMatrix) else np.asarray(outputs)
    labels = np.asarray(labels, dtype=int)
    if values.shape[0] != labels.shape[0]:
        raise ShapeError("outputs and labels disagree on sample count")
    best = values.max(axis=1)
    kept = np.flatnonzero(best >= theta)
    errors = int(np.sum(np.argmax(values[kept], axis=1) != labels[kept])) if kept.size else 0
    return kept, int(kept.size), errors


def correct_mask(outputs, labels) -> np.ndarray:
    """argmax(outputs) == label, the mask vertex_concentration expects."""
    values = outputs.values if isinstance(outputs, OutputMatrix) else np.asarray(outputs)
    return np.argmax(values, axis=1) == np.asarray(labels, dtype=int)
