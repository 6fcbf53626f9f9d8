"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError (and subclasses) -> 2,
OptimizationError -> 3. Anything else is a plain crash.
"""


class VizError(Exception):
    """Base class for all bbviz errors."""


class DataError(VizError):
    """Bad input data: wrong shapes, non-finite values, empty sets."""


class FormatError(DataError):
    """Malformed file content (parse failures, wrong column counts)."""


class ShapeError(DataError):
    """Dimension mismatch between arrays that must agree."""


class ResourceError(DataError):
    """Request exceeds a hard resource guard (e.g. 2^K hull corners)."""


class OptimizationError(VizError):
    """Optimizer hit a non-finite objective/gradient or invalid budget."""
