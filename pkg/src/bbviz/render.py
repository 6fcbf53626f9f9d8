"""Deterministic SVG scatterograms.

Output is plain SVG 1.1 text built from line/circle/path/rect/text elements
only, with fixed-precision coordinates and no timestamps or generated ids,
so identical scenes render to identical bytes. Class markers follow the
plus, circle, cross, square, diamond, triangle order and cycle (smaller)
past six classes; perturbed-kind layers draw beneath the rest at 60% size
so replica clouds do not cover the training images.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DataError
from .geometry import PolygonMap

_MARKER_SHAPES = ("plus", "circle", "cross", "square", "diamond", "triangle")
_MARKER_FILLED = {"plus": False, "circle": False, "cross": False,
                  "square": True, "diamond": True, "triangle": True}
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
_BASE_SIZE = 9.0

_SQUARE_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass(frozen=True)
class MarkerStyle:
    shape: str
    size: float
    filled: bool


@dataclass
class Layer:
    """One ordered group of points; kind controls z-order and marker scale."""

    points: list
    kind: str = "train"
    size_scale: float | None = None

    def scale(self) -> float:
        if self.size_scale is not None:
            return self.size_scale
        return 0.6 if self.kind == "perturbed" else 1.0


@dataclass
class Scene:
    """Everything render_svg needs; pmap None means the K=2 square view."""

    pmap: PolygonMap | None
    layers: list = field(default_factory=list)
    edges: bool = True
    hull: np.ndarray | None = None
    segments: list = field(default_factory=list)  # planar 2x2 arrays
    vertex_labels: bool = True
    class_names: tuple | None = None
    mono: bool = False

    def frame_vertices(self) -> np.ndarray:
        return _SQUARE_CORNERS if self.pmap is None else self.pmap.vertices

    def k(self) -> int:
        return 2 if self.pmap is None else self.pmap.k


def marker_for_class(index: int) -> MarkerStyle:
    """Fixed shape order, cycling with a 3/4 size cut per wrap."""
    if index < 0:
        raise DataError(f"class index must be >= 0, got {index}")
    shape = _MARKER_SHAPES[index % 6]
    size = _BASE_SIZE * (0.75 ** (index // 6))
    return MarkerStyle(shape=shape, size=size, filled=_MARKER_FILLED[shape])


def class_color(index: int, mono: bool) -> str:
    return "#000000" if mono else _PALETTE[index % 6]


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def _marker_svg(style: MarkerStyle, x: float, y: float, color: str,
                scale: float) -> str:
    half = style.size * scale / 2.0
    fill = color if style.filled else "none"
    if style.shape == "circle":
        return (f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(half)}" '
                f'fill="{fill}" stroke="{color}" stroke-width="1"/>')
    if style.shape == "square":
        return (f'<rect x="{_fmt(x - half)}" y="{_fmt(y - half)}" '
                f'width="{_fmt(2 * half)}" height="{_fmt(2 * half)}" '
                f'fill="{fill}" stroke="{color}" stroke-width="1"/>')
    if style.shape == "plus":
        d = (f"M {_fmt(x - half)} {_fmt(y)} H {_fmt(x + half)} "
             f"M {_fmt(x)} {_fmt(y - half)} V {_fmt(y + half)}")
    elif style.shape == "cross":
        d = (f"M {_fmt(x - half)} {_fmt(y - half)} L {_fmt(x + half)} {_fmt(y + half)} "
             f"M {_fmt(x - half)} {_fmt(y + half)} L {_fmt(x + half)} {_fmt(y - half)}")
    elif style.shape == "diamond":
        d = (f"M {_fmt(x)} {_fmt(y - half)} L {_fmt(x + half)} {_fmt(y)} "
             f"L {_fmt(x)} {_fmt(y + half)} L {_fmt(x - half)} {_fmt(y)} Z")
    elif style.shape == "triangle":
        r = half * 2.0 / math.sqrt(3.0)
        d = (f"M {_fmt(x)} {_fmt(y - r)} L {_fmt(x + half)} {_fmt(y + r / 2)} "
             f"L {_fmt(x - half)} {_fmt(y + r / 2)} Z")
    else:
        raise DataError(f"unknown marker shape {style.shape!r}")
    return f'<path d="{d}" fill="{fill}" stroke="{color}" stroke-width="1"/>'


def render_svg(scene: Scene, width: int = 560, height: int = 560,
               margin: int = 40) -> str:
    """Render a scene to SVG text; byte-identical for identical inputs.

    The view is fitted to the polygon (or unit square) bounding box expanded
    to cover every plotted point, overlay segment and hull corner, scaled
    uniformly so relative distances survive up to one global factor.
    """
    if width <= 2 * margin or height <= 2 * margin:
        raise DataError(f"width/height must exceed 2*margin={2 * margin}")

    frame = scene.frame_vertices()
    bbox_pts = [frame]
    for layer in scene.layers:
        if layer.points:
            bbox_pts.append(np.array([[p.x, p.y] for p in layer.points]))
    if scene.hull is not None and len(scene.hull):
        bbox_pts.append(np.asarray(scene.hull, dtype=float))
    for seg in scene.segments:
        bbox_pts.append(np.asarray(seg, dtype=float))
    allpts = np.vstack(bbox_pts)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = hi - lo
    avail = np.array([width - 2.0 * margin, height - 2.0 * margin])
    with np.errstate(divide="ignore"):
        ratios = np.where(span > 0, avail / np.where(span > 0, span, 1.0), np.inf)
    scale = float(min(ratios.min(), 1e6))
    offset_x = (width - span[0] * scale) / 2.0
    offset_y = (height - span[1] * scale) / 2.0

    def to_px(point):
        return (offset_x + (point[0] - lo[0]) * scale,
                offset_y + (hi[1] - point[1]) * scale)

    body = []
    line_color = "#000000" if scene.mono else "#555555"

    if scene.edges:
        n = len(frame)
        for i in range(n):
            a = to_px(frame[i])
            b = to_px(frame[(i + 1) % n])
            body.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" '
                        f'x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                        f'stroke="{line_color}" stroke-width="1"/>')

    if scene.hull is not None and len(scene.hull):
        corners = [to_px(p) for p in np.asarray(scene.hull, dtype=float)]
        d = "M " + " L ".join(f"{_fmt(px)} {_fmt(py)}" for px, py in corners) + " Z"
        body.append(f'<path d="{d}" fill="none" stroke="#999999" '
                    f'stroke-width="1" stroke-dasharray="4 3"/>')

    for seg in scene.segments:
        seg = np.asarray(seg, dtype=float)
        a, b = to_px(seg[0]), to_px(seg[1])
        body.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" '
                    f'x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                    f'stroke="#888888" stroke-width="1" stroke-dasharray="2 3"/>')

    # perturbed layers go first so their clouds sit beneath everything else
    ordered = ([l for l in scene.layers if l.kind == "perturbed"]
               + [l for l in scene.layers if l.kind != "perturbed"])
    for layer in ordered:
        for point in layer.points:
            style = marker_for_class(point.class_label)
            px, py = to_px((point.x, point.y))
            body.append(_marker_svg(style, px, py,
                                    class_color(point.class_label, scene.mono),
                                    layer.scale()))

    if scene.vertex_labels:
        center_px = to_px(frame.mean(axis=0))
        names = scene.class_names
        for idx in range(scene.k()):
            # square view targets: class 0 at (1,0), class 1 at (0,1)
            vertex = _SQUARE_CORNERS[[1, 3][idx]] if scene.pmap is None else frame[idx]
            vx, vy = to_px(vertex)
            dx, dy = vx - center_px[0], vy - center_px[1]
            norm = math.hypot(dx, dy) or 1.0
            lx, ly = vx + 14.0 * dx / norm, vy + 14.0 * dy / norm
            label = names[idx] if names else f"c{idx}"
            body.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="11" '
                        f'text-anchor="middle" dominant-baseline="middle" '
                        f'fill="{line_color}">{_escape(label)}</text>')

    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def _escape(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
