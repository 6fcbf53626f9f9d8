"""Gaussian perturbation of standardized feature vectors.

Noise scales are quoted against standardized features (mean 0, std 1), so a
fraction of 0.02 means per-feature Gaussian noise with std 0.02 regardless
of the original units. Replica streams are derived from (seed, row, replica)
so generation order or parallel scheduling cannot change the result.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Standardization, seed_entropy, with_standardization
from .errors import DataError


@dataclass(frozen=True)
class PerturbationSpec:
    """fraction: noise std per standardized feature; per_point: replicas per
    source row; selection: row indices to perturb (None = all rows)."""

    fraction: float
    per_point: int = 1
    seed: int = 0
    selection: tuple | None = None

    def __post_init__(self):
        if self.fraction < 0:
            raise DataError(f"noise fraction must be >= 0, got {self.fraction}")
        if self.per_point < 1:
            raise DataError(f"per_point must be >= 1, got {self.per_point}")
        if self.selection is not None:
            object.__setattr__(self, "selection", tuple(int(i) for i in self.selection))


def standardize(features: np.ndarray):
    """Shift/scale each feature to mean 0, std 1 (population std).

    Zero-spread features get std forced to 1 and are flagged in the returned
    Standardization so callers can tell nothing was scaled there.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.size == 0:
        raise DataError(f"standardize needs a nonempty 2-D matrix, got {features.shape}")
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    constant = std == 0.0
    std = np.where(constant, 1.0, std)
    return (features - mean) / std, Standardization(mean=mean, std=std, constant=constant)


def standardize_dataset(dataset: Dataset) -> Dataset:
    """Dataset copy with standardized features and the stats attached."""
    scaled, stats = standardize(dataset.features)
    return with_standardization(dataset, scaled, stats)


def _replica_rng(seed: int, row: int, replica: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed_entropy(seed), spawn_key=(row, replica))
    return np.random.default_rng(seq)


def gaussian_perturb(features: np.ndarray, labels: np.ndarray,
                     spec: PerturbationSpec):
    """Replicate selected rows with additive noise fraction * N(0, I).

    Returns (perturbed features, inherited labels, source row indices).
    Row i yields spec.per_point replicas in a block; labels carry over and
    source indices point back at i. Deterministic per spec.seed.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, d = features.shape
    if labels.shape != (n,):
        raise DataError(f"expected {n} labels, got shape {labels.shape}")
    rows = np.arange(n) if spec.selection is None else np.asarray(spec.selection, dtype=int)
    if rows.size and (rows.min() < 0 or rows.max() >= n):
        raise DataError(f"selection indices must lie in [0, {n})")

    out = np.empty((rows.size * spec.per_point, d))
    src = np.empty(rows.size * spec.per_point, dtype=int)
    pos = 0
    for row in rows:
        base = features[row]
        for replica in range(spec.per_point):
            noise = _replica_rng(spec.seed, int(row), replica).standard_normal(d)
            out[pos] = base + spec.fraction * noise
            src[pos] = row
            pos += 1
    return out, labels[src], src


def perturb_dataset(dataset: Dataset, spec: PerturbationSpec):
    """gaussian_perturb over a (standardized) Dataset; returns the replica
    Dataset plus the source indices."""
    perturbed, labels, src = gaussian_perturb(dataset.features, dataset.labels, spec)
    return Dataset(perturbed, labels, dataset.class_names, dataset.standardization), src
