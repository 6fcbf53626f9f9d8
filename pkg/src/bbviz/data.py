"""Dataset ingestion: the two benchmark tabular sets plus a generic CSV path.

Wine: comma-separated UCI rows, class label 1-3 in the first field followed
by 13 numeric features (178 samples, class counts 59/71/48).

Satimage: whitespace-separated rows of 36 integer spectral features with the
label last; labels are {1,2,3,4,5,7} (label 6 unused upstream). Dropping the
last, mixed-soil class (label 7) leaves 5 classes and 3397 training rows.
"""

from dataclasses import dataclass, replace
import hashlib
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError

WINE_CLASS_NAMES = ("class-1", "class-2", "class-3")
SATIMAGE_LABELS = (1, 2, 3, 4, 5, 7)
SATIMAGE_CLASS_NAMES = ("red-soil", "cotton-crop", "grey-soil",
                        "damp-grey-soil", "vegetation-stubble",
                        "very-damp-grey-soil")


@dataclass(frozen=True)
class Standardization:
    """Per-feature mean/std used to standardize; constant marks zero-spread
    features whose std was forced to 1."""

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_names: tuple
    standardization: Standardization | None = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2 or features.shape[0] == 0:
            raise DataError(f"features must be a nonempty 2-D matrix, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DataError(
                f"expected {features.shape[0]} labels, got shape {labels.shape}")
        if not np.all(np.isfinite(features)):
            raise DataError("features contain non-finite values")
        k = len(self.class_names)
        if np.any((labels < 0) | (labels >= k)):
            raise DataError(f"labels must lie in [0, {k})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def k(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def load_wine(path) -> Dataset:
    """Load a UCI-format wine file: label 1-3 first, then 13 features."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    features, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 14:
                raise FormatError(
                    f"{path}:{lineno}: expected 14 comma-separated fields, got {len(parts)}")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
            label = int(row[0])
            if label not in (1, 2, 3) or row[0] != label:
                raise FormatError(f"{path}:{lineno}: class label must be 1, 2 or 3")
            labels.append(label - 1)
            features.append(row[1:])
    if not features:
        raise FormatError(f"{path}: no data rows")
    return Dataset(np.array(features), np.array(labels), WINE_CLASS_NAMES)


def load_satimage(path, drop_last_class: bool = True) -> Dataset:
    """Load a satimage training file; optionally drop the mixed-soil class.

    With drop_last_class, rows labeled 7 are removed and the remaining labels
    1-5 are remapped to 0-4 (canonical file: N=3397, D=36, K=5). Without it
    all six classes are kept, label 7 mapping to index 5.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    features, raw_labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 37:
                raise FormatError(
                    f"{path}:{lineno}: expected 37 whitespace-separated fields, got {len(parts)}")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
            label = int(row[36])
            if label not in SATIMAGE_LABELS:
                raise FormatError(
                    f"{path}:{lineno}: unknown class label {label}, expected one of {SATIMAGE_LABELS}")
            raw_labels.append(label)
            features.append(row[:36])
    if not features:
        raise FormatError(f"{path}: no data rows")
    features = np.array(features)
    raw_labels = np.array(raw_labels)
    if drop_last_class:
        keep = raw_labels != 7
        return Dataset(features[keep], raw_labels[keep] - 1, SATIMAGE_CLASS_NAMES[:5])
    index = {lab: i for i, lab in enumerate(SATIMAGE_LABELS)}
    return Dataset(features, np.array([index[l] for l in raw_labels]),
                   SATIMAGE_CLASS_NAMES)


def load_csv(path, label_col: int = 0, class_names=None) -> Dataset:
    """Generic comma-separated loader; label_col picks the class column.

    A single leading header line is skipped when its label field is not an
    integer. Labels may be arbitrary integers; they are compacted to 0..K-1
    in sorted order.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    rows = []
    with open(path) as fh:
        lines = fh.readlines()
    start = 0
    if lines:
        first = lines[0].strip().split(",")
        try:
            int(float(first[label_col if label_col >= 0 else len(first) + label_col]))
        except (ValueError, IndexError):
            start = 1
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if width is None:
            width = len(parts)
            if width < 2:
                raise FormatError(f"{path}:{lineno}: need at least 2 columns")
        elif len(parts) != width:
            raise FormatError(
                f"{path}:{lineno}: expected {width} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
    if not rows:
        raise FormatError(f"{path}: no data rows")
    table = np.array(rows)
    col = label_col if label_col >= 0 else table.shape[1] + label_col
    raw = table[:, col]
    if np.any(raw != np.round(raw)):
        raise FormatError(f"{path}: label column {label_col} has non-integer values")
    raw = raw.astype(int)
    classes = np.unique(raw)
    labels = np.searchsorted(classes, raw)
    features = np.delete(table, col, axis=1)
    if class_names is None:
        class_names = tuple(f"class-{c}" for c in classes)
    return Dataset(features, labels, class_names)


def save_csv(dataset: Dataset, path, header: bool = True) -> None:
    """Write features plus a trailing label column; floats use repr so a
    load_csv round trip is bit-exact."""
    path = Path(path)
    with open(path, "w") as fh:
        if header:
            cols = [f"f{i}" for i in range(dataset.d)] + ["label"]
            fh.write(",".join(cols) + "\n")
        for row, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")


def split(dataset: Dataset, fraction: float, seed: int):
    """Seeded uniform shuffle; first ceil(fraction*N) rows train, rest test."""
    if not 0.0 < fraction < 1.0:
        raise DataError(f"split fraction must be in (0, 1), got {fraction}")
    n_train = int(np.ceil(fraction * dataset.n))
    if n_train == 0 or n_train == dataset.n:
        raise DataError(
            f"split of {dataset.n} rows at fraction {fraction} leaves an empty side")
    order = np.random.default_rng(seed_entropy(seed)).permutation(dataset.n)
    train_idx, test_idx = order[:n_train], order[n_train:]
    train = Dataset(dataset.features[train_idx], dataset.labels[train_idx],
                    dataset.class_names, dataset.standardization)
    test = Dataset(dataset.features[test_idx], dataset.labels[test_idx],
                   dataset.class_names, dataset.standardization)
    return train, test


def dataset_fingerprint(dataset: Dataset) -> str:
    """sha256 over the raw feature/label bytes; identifies dataset content."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(dataset.features).tobytes())
    digest.update(np.ascontiguousarray(dataset.labels).tobytes())
    return digest.hexdigest()


def with_standardization(dataset: Dataset, features, stats) -> Dataset:
    """Copy of dataset with replaced features and attached stats."""
    return replace(dataset, features=np.asarray(features, dtype=float),
                   standardization=stats)


def seed_entropy(seed: int) -> int:
    # SeedSequence wants non-negative entropy; fold negatives into 64 bits.
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def wine_to_uci_rows(features: np.ndarray, labels: np.ndarray) -> list[str]:
    """Format rows back into the UCI wine layout (label first, 1-based)."""
    rows = []
    for row, label in zip(features, labels):
        fields = [str(int(label) + 1)] + [_trim(v) for v in row]
        rows.append(",".join(fields))
    return rows


def _trim(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def materialize_wine(path) -> Path:
    """Write the bundled copy of the wine data to path in UCI format.

    scikit-learn ships the canonical 178-sample table, which avoids any
    network fetch; the written file parses with load_wine.
    """
    from sklearn.datasets import load_wine as _sk_load_wine

    bundle = _sk_load_wine()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = wine_to_uci_rows(bundle.data, bundle.target)
    path.write_text("\n".join(rows) + "\n")
    return path


# Canonical per-label row counts of the satimage training file. The synthetic
# stand-in below reproduces the exact file structure for offline use; it is
# NOT the real data and is only a loader/pipeline substitute.
SATIMAGE_TRAIN_COUNTS = {1: 1072, 2: 479, 3: 961, 4: 415, 5: 470, 7: 1038}

# Band means per class; the grey-soil family (3, 4, 7) is kept close on
# purpose so classifiers mix classes 3 and 4 the way the real data does.
_SAT_BAND_MEANS = {
    1: (65, 95, 110, 90),    # red soil
    2: (50, 40, 110, 120),   # cotton crop
    3: (85, 105, 120, 95),   # grey soil
    4: (82, 101, 117, 92),   # damp grey soil, ~2 sigma from class 3
    5: (60, 70, 95, 100),    # vegetation stubble
    7: (79, 97, 114, 89),    # very damp grey soil
}


def materialize_synthetic_satimage(path, seed: int = 0) -> Path:
    """Write a synthetic satimage-format file with the canonical class counts.

    Rows are 36 integers (4 spectral bands x 9 pixels) drawn around per-class
    band means, with the grey-soil classes (3, 4, 7) deliberately overlapping.
    Deterministic per seed.
    """
    rng = np.random.default_rng(seed_entropy(seed))
    lines = []
    for label in SATIMAGE_LABELS:
        count = SATIMAGE_TRAIN_COUNTS[label]
        means = np.repeat(np.array(_SAT_BAND_MEANS[label], dtype=float), 9)
        block = means + rng.normal(scale=9.0, size=(count, 36))
        block = np.clip(np.round(block), 0, 255).astype(int)
        for row in block:
            lines.append(" ".join(str(v) for v in row) + f" {label}")
    # canonical file interleaves classes; a seeded shuffle is close enough
    order = rng.permutation(len(lines))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines[i] for i in order) + "\n")
    return path
