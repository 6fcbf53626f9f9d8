"""bbviz: polygon scatterogram visualization of black-box classifier outputs."""

from .errors import (DataError, FormatError, OptimizationError, ResourceError,
                     ShapeError, VizError)
from .geometry import (ImagePoint, OutputMatrix, PolygonMap, binary_hull,
                       build_projection, characteristic_segment, polygon_center,
                       polygon_vertices, project, square_view)

__version__ = "0.1.0"

__all__ = [
    "DataError", "FormatError", "OptimizationError", "ResourceError",
    "ShapeError", "VizError",
    "ImagePoint", "OutputMatrix", "PolygonMap", "binary_hull",
    "build_projection", "characteristic_segment", "polygon_center",
    "polygon_vertices", "project", "square_view",
    "__version__",
]
