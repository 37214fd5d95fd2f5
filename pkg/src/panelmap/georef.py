"""Pixel-to-world georeferencing via 6-coefficient affine transforms
(world-file convention, pixel-center anchored) and GeoJSON export of
projected panel detections.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import WorldFileError
from .geometry import to_vertices
from .suppression import Detection


@dataclass(frozen=True)
class GeoTransform:
    """Affine pixel->world map: X = a*px + b*py + c, Y = d*px + e*py + f.

    Coefficients address pixel centers. e is typically negative (world y
    grows north while pixel rows grow down).
    """

    a: float
    d: float
    b: float
    e: float
    c: float
    f: float

    def __post_init__(self):
        for name in ("a", "d", "b", "e", "c", "f"):
            if not math.isfinite(getattr(self, name)):
                raise WorldFileError(f"coefficient {name} must be finite")
        if self.det == 0.0:
            raise WorldFileError("transform is singular (a*e - b*d == 0)")

    @property
    def det(self) -> float:
        return self.a * self.e - self.b * self.d


def parse_world_file(text: str) -> GeoTransform:
    """Parse the 6-line world-file format (line order A, D, B, E, C, F)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 6:
        raise WorldFileError(f"world file must have exactly 6 numeric lines, got {len(lines)}")
    vals = []
    for i, ln in enumerate(lines, start=1):
        try:
            vals.append(float(ln))
        except ValueError:
            raise WorldFileError(f"world file line {i} is not numeric: {ln!r}") from None
    a, d, b, e, c, f = vals
    return GeoTransform(a=a, d=d, b=b, e=e, c=c, f=f)


def serialize_world_file(gt: GeoTransform) -> str:
    """Emit the 6-line world-file text for a transform."""
    return "".join(_fmt(v) + "\n" for v in (gt.a, gt.d, gt.b, gt.e, gt.c, gt.f))


def pixel_to_geo(pt: tuple[float, float], gt: GeoTransform) -> tuple[float, float]:
    """Project a pixel-space point into world coordinates."""
    px, py = pt
    return (gt.a * px + gt.b * py + gt.c, gt.d * px + gt.e * py + gt.f)


def geo_to_pixel(pt: tuple[float, float], gt: GeoTransform) -> tuple[float, float]:
    """Invert pixel_to_geo."""
    x, y = pt[0] - gt.c, pt[1] - gt.f
    det = gt.det
    return ((gt.e * x - gt.b * y) / det, (gt.a * y - gt.d * x) / det)


@dataclass(frozen=True)
class PanelFeature:
    """One projected panel: closed 5-point world-coordinate ring plus stats."""

    id: str
    ring: tuple[tuple[float, float], ...]
    score: float
    theta: float
    area_m2: float

    def __post_init__(self):
        if len(self.ring) != 5 or self.ring[0] != self.ring[-1]:
            raise WorldFileError("feature ring must be closed with 5 points")


def _ring_signed_area(ring: tuple[tuple[float, float], ...]) -> float:
    """Shoelace signed area over the first 4 ring points.

    Coordinates are taken relative to the first vertex: world offsets run to
    millions of meters and the raw shoelace products would cancel away most
    of the significand.
    """
    ox, oy = ring[0]
    s = 0.0
    for i in range(4):
        x0, y0 = ring[i][0] - ox, ring[i][1] - oy
        x1, y1 = ring[(i + 1) % 4][0] - ox, ring[(i + 1) % 4][1] - oy
        s += x0 * y1 - x1 * y0
    return s / 2.0


def project_detection(det: Detection, gt: GeoTransform, feature_id: str) -> PanelFeature:
    """Project one detection's corners to world coordinates.

    The ring is stored counter-clockwise in world coordinates and closed.
    """
    corners = [pixel_to_geo(v, gt) for v in to_vertices(det.box).vertices]
    signed = _ring_signed_area(tuple(corners) + (corners[0],))
    if signed < 0.0:
        corners.reverse()
        signed = -signed
    ring = tuple(corners) + (corners[0],)
    return PanelFeature(
        id=feature_id,
        ring=ring,
        score=det.score,
        theta=det.box.theta,
        area_m2=signed,
    )


def _fmt(v: float) -> str:
    """Fixed float formatting (9 significant digits) for byte-stable output."""
    if v == int(v) and abs(v) < 1e15:
        # keep integral values free of exponent notation
        return f"{v:.1f}"
    return f"{v:.9g}"


def export_geojson(dets: list[Detection], gt: GeoTransform, crs_name: str = "") -> str:
    """Render detections as a GeoJSON FeatureCollection string.

    Output is byte-stable: fixed key order, 9-significant-digit floats,
    counter-clockwise closed rings, feature ids assigned in input order.
    """
    features = []
    for i, det in enumerate(dets):
        feat = project_detection(det, gt, f"panel_{i:06d}")
        coords = ", ".join(f"[{_fmt(x)}, {_fmt(y)}]" for x, y in feat.ring)
        props = (
            f'"id": {json.dumps(feat.id)}, '
            f'"score": {_fmt(feat.score)}, '
            f'"theta_deg": {_fmt(feat.theta)}, '
            f'"area_m2": {_fmt(feat.area_m2)}'
        )
        features.append(
            '{"type": "Feature", '
            f'"geometry": {{"type": "Polygon", "coordinates": [[{coords}]]}}, '
            f'"properties": {{{props}}}}}'
        )
    body = ",\n    ".join(features)
    feature_block = f"[\n    {body}\n  ]" if features else "[]"
    return (
        '{\n'
        f'  "type": "FeatureCollection",\n'
        f'  "crs": {json.dumps(crs_name)},\n'
        f'  "features": {feature_block}\n'
        '}\n'
    )
