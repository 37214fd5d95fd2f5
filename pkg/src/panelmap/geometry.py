"""Exact rotated-rectangle geometry: representation, conversion, IoU.

A box is the 5-tuple (cx, cy, w, h, theta): centroid pixel coordinates, the
side lengths, and a rotation angle in degrees. The canonical form keeps
``w <= h`` (w is the shorter side) and ``theta`` in (-90, 90]. Angles are
measured counter-clockwise in a y-up mathematical frame; raster code treats
y as a row index and accounts for the flip at I/O boundaries only, so none
of the math here changes for pixel data.

All functions are pure and operate on immutable values; they are safe to
call concurrently from any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidBoxError, NotARectangleError

# Boxes with less area than this are treated as empty by IoU (avoids 0/0).
MIN_BOX_AREA = 1e-12

# Relative tolerance for the rectangle test in from_vertices. Loose enough
# to absorb float noise from round trips, tight enough to reject real skew.
RECTANGLE_TOL = 1e-4


@dataclass(frozen=True)
class RotatedBox:
    """Canonical oriented rectangle: w <= h, theta in (-90, 90] degrees."""

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidBoxError(f"box field {name} is not finite")
        if self.w <= 0 or self.h <= 0:
            raise InvalidBoxError(f"box dimensions must be positive: w={self.w}, h={self.h}")
        if self.w > self.h:
            raise InvalidBoxError(
                f"box is not canonical (w={self.w} > h={self.h}); use canonicalize()"
            )
        if not (-90.0 < self.theta <= 90.0):
            raise InvalidBoxError(
                f"box is not canonical (theta={self.theta} outside (-90, 90]); use canonicalize()"
            )

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)


@dataclass(frozen=True)
class Quad:
    """Four (x, y) vertices of a convex quadrilateral, counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) != 4:
            raise InvalidBoxError(f"quad needs exactly 4 vertices, got {len(self.vertices)}")
        for x, y in self.vertices:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidBoxError("quad vertex is not finite")

    def as_array(self) -> np.ndarray:
        """Vertices as a (4, 2) float64 array."""
        return np.asarray(self.vertices, dtype=np.float64)


def wrap_angle(theta: float) -> float:
    """Wrap an angle in degrees into the canonical range (-90, 90]."""
    t = math.fmod(theta, 180.0)
    if t <= -90.0:
        t += 180.0
    elif t > 90.0:
        t -= 180.0
    return t


def canonicalize(cx: float, cy: float, w: float, h: float, theta: float) -> RotatedBox:
    """Build a canonical RotatedBox from raw values.

    If w > h the sides are swapped and theta shifted by 90 degrees, which
    describes the identical point set; theta is then wrapped modulo 180 into
    (-90, 90]. Raises InvalidBoxError for non-positive or non-finite input.
    """
    if not all(math.isfinite(v) for v in (cx, cy, w, h, theta)):
        raise InvalidBoxError("box fields must be finite")
    if w <= 0 or h <= 0:
        raise InvalidBoxError(f"box dimensions must be positive: w={w}, h={h}")
    if w > h:
        w, h = h, w
        theta = theta + 90.0
    return RotatedBox(cx, cy, w, h, wrap_angle(theta))


def _vertex_tuple(box: RotatedBox) -> tuple[tuple[float, float], ...]:
    """Corner positions, CCW, starting from the (-w/2, -h/2) offset."""
    a = math.radians(box.theta)
    ca, sa = math.cos(a), math.sin(a)
    # Rotated images of the half-extent axes (w/2, 0) and (0, h/2).
    wx, wy = ca * 0.5 * box.w, sa * 0.5 * box.w
    hx, hy = -sa * 0.5 * box.h, ca * 0.5 * box.h
    cx, cy = box.cx, box.cy
    return (
        (cx - wx - hx, cy - wy - hy),
        (cx + wx - hx, cy + wy - hy),
        (cx + wx + hx, cy + wy + hy),
        (cx - wx + hx, cy - wy + hy),
    )


def to_vertices(box: RotatedBox) -> Quad:
    """Convert a box to its four corner vertices.

    Each vertex is centroid + R(theta) @ offset for the offsets
    (-w/2, -h/2), (w/2, -h/2), (w/2, h/2), (-w/2, h/2), so at theta = 0 the
    w side spans the x axis and the h side spans the y axis. The order is
    counter-clockwise in the y-up frame.
    """
    return Quad(_vertex_tuple(box))


def from_vertices(quad: Quad) -> RotatedBox:
    """Recover the canonical box whose corners match ``quad``.

    The quad must be a rectangle within RECTANGLE_TOL relative deviation
    (opposite sides equal, diagonals equal); otherwise NotARectangleError is
    raised carrying the measured deviation. The centroid is the vertex mean
    and opposite side lengths are averaged to cancel float noise.
    """
    v = quad.vertices
    sides = []
    for i in range(4):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % 4]
        sides.append(math.hypot(x1 - x0, y1 - y0))
    d1 = math.hypot(v[2][0] - v[0][0], v[2][1] - v[0][1])
    d2 = math.hypot(v[3][0] - v[1][0], v[3][1] - v[1][1])

    scale = max(*sides, d1, d2)
    if scale <= 0:
        raise NotARectangleError("degenerate quad: all vertices coincide", deviation=math.inf)
    deviation = max(abs(sides[0] - sides[2]), abs(sides[1] - sides[3]), abs(d1 - d2)) / scale
    if deviation > RECTANGLE_TOL or min(sides) <= 0:
        raise NotARectangleError(
            f"quad is not a rectangle (relative deviation {deviation:.3e})", deviation=deviation
        )

    cx = sum(p[0] for p in v) / 4.0
    cy = sum(p[1] for p in v) / 4.0
    w = 0.5 * (sides[0] + sides[2])
    h = 0.5 * (sides[1] + sides[3])
    theta = math.degrees(math.atan2(v[1][1] - v[0][1], v[1][0] - v[0][0]))
    return canonicalize(cx, cy, w, h, theta)


def rotate_point(x: float, y: float, angle: float, center: tuple[float, float]) -> tuple[float, float]:
    """Rotate a point by ``angle`` degrees counter-clockwise about ``center``."""
    a = math.radians(angle)
    ca, sa = math.cos(a), math.sin(a)
    dx, dy = x - center[0], y - center[1]
    return (center[0] + ca * dx - sa * dy, center[1] + sa * dx + ca * dy)


def rotate_box(box: RotatedBox, angle: float, center: tuple[float, float]) -> RotatedBox:
    """Rigidly rotate a box about ``center``: centroid moves, theta shifts, w/h unchanged."""
    cx, cy = rotate_point(box.cx, box.cy, angle, center)
    return canonicalize(cx, cy, box.w, box.h, box.theta + angle)


def _polygon_area(poly: Sequence[tuple[float, float]]) -> float:
    """Unsigned area by the shoelace formula."""
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        acc += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return 0.5 * abs(acc)


def _clip_convex(subject: Sequence[tuple[float, float]], clip: Sequence[tuple[float, float]]):
    """Sutherland-Hodgman: clip ``subject`` by each edge of the CCW ``clip`` polygon."""
    poly = list(subject)
    k = len(clip)
    for idx in range(k):
        if not poly:
            return poly
        c1x, c1y = clip[idx]
        c2x, c2y = clip[(idx + 1) % k]
        ex, ey = c2x - c1x, c2y - c1y
        out: list[tuple[float, float]] = []
        sx, sy = poly[-1]
        fs = ex * (sy - c1y) - ey * (sx - c1x)
        for px, py in poly:
            fp = ex * (py - c1y) - ey * (px - c1x)
            if fp >= 0.0:
                if fs < 0.0:
                    t = fs / (fs - fp)
                    out.append((sx + t * (px - sx), sy + t * (py - sy)))
                out.append((px, py))
            elif fs >= 0.0:
                t = fs / (fs - fp)
                out.append((sx + t * (px - sx), sy + t * (py - sy)))
            sx, sy, fs = px, py, fp
        poly = out
    return poly


def rotated_iou(a: RotatedBox, b: RotatedBox) -> float:
    """Exact intersection-over-union of two rotated boxes.

    The intersection polygon is obtained by clipping one box's quad against
    the other's four half-planes (both quads are convex and CCW), its area by
    the shoelace formula, and union = area(a) + area(b) - intersection.
    Boxes with area below MIN_BOX_AREA score 0 against anything. Result is
    clamped to [0, 1].
    """
    if a.area < MIN_BOX_AREA or b.area < MIN_BOX_AREA:
        return 0.0
    # Clipping is not bit-exactly symmetric in its two roles; ordering the
    # operands deterministically makes rotated_iou(a, b) == rotated_iou(b, a).
    if (b.cx, b.cy, b.w, b.h, b.theta) < (a.cx, a.cy, a.w, a.h, a.theta):
        a, b = b, a
    # Bounding-circle reject: centers farther apart than the summed
    # half-diagonals cannot intersect.
    dx, dy = b.cx - a.cx, b.cy - a.cy
    reach = 0.5 * (a.diagonal + b.diagonal)
    if dx * dx + dy * dy >= reach * reach:
        return 0.0
    va = _vertex_tuple(a)
    vb = _vertex_tuple(b)
    inter = _polygon_area(_clip_convex(va, vb))
    if inter <= 0.0:
        return 0.0
    # Shoelace on the source quads keeps the ratio exactly 1.0 for identical
    # boxes (identical vertex lists survive clipping bit-for-bit).
    union = _polygon_area(va) + _polygon_area(vb) - inter
    if union <= 0.0:
        return 0.0
    iou = inter / union
    if iou < 0.0:
        return 0.0
    return 1.0 if iou > 1.0 else iou


def pairwise_iou(boxes_a: Sequence[RotatedBox], boxes_b: Sequence[RotatedBox]) -> np.ndarray:
    """IoU matrix of shape (len(boxes_a), len(boxes_b)).

    Entries are bit-identical to rotated_iou on the same pair; the
    bounding-circle reject inside it keeps mostly-disjoint workloads (anchor
    matching, dense-scene evaluation) cheap.
    """
    out = np.zeros((len(boxes_a), len(boxes_b)), dtype=np.float64)
    for i, ba in enumerate(boxes_a):
        for j, bb in enumerate(boxes_b):
            out[i, j] = rotated_iou(ba, bb)
    return out


def boxes_to_array(boxes: Iterable[RotatedBox]) -> np.ndarray:
    """Pack boxes into an (N, 5) float64 array of (cx, cy, w, h, theta)."""
    return np.asarray([(b.cx, b.cy, b.w, b.h, b.theta) for b in boxes], dtype=np.float64).reshape(
        -1, 5
    )


def array_to_boxes(arr: np.ndarray) -> list[RotatedBox]:
    """Unpack an (N, 5) array into canonical boxes."""
    return [canonicalize(*row) for row in np.asarray(arr, dtype=np.float64).reshape(-1, 5)]
