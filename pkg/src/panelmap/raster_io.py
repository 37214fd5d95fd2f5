"""8-bit RGB raster read/write (PNG), tile cropping, and detection overlay
rendering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw, UnidentifiedImageError

from .errors import RasterIOError, UnsupportedDepthError
from .geometry import to_vertices
from .suppression import Detection
from .tiling import TileSpec

# Stroke color ramp: low-confidence amber to high-confidence green.
LOW_SCORE_RGB = (255, 170, 0)
HIGH_SCORE_RGB = (0, 210, 90)


@dataclass(frozen=True, eq=False)
class Raster:
    """An 8-bit RGB image held as a (height, width, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.dtype != np.uint8:
            raise UnsupportedDepthError(f"raster must be 8-bit, got dtype {self.data.dtype}")
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise RasterIOError(f"raster must be (h, w, 3), got shape {self.data.shape}")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return 3


def read_raster(path: str) -> Raster:
    """Load an 8-bit RGB (or 8-bit grayscale, expanded) image file."""
    try:
        img = Image.open(path)
        img.load()
    except UnidentifiedImageError:
        raise RasterIOError(f"not a recognized image file: {path}") from None
    if img.mode == "L":
        img = img.convert("RGB")
    if img.mode != "RGB":
        raise UnsupportedDepthError(
            f"only 8-bit RGB rasters are supported, got mode {img.mode!r} in {path}"
        )
    return Raster(np.asarray(img, dtype=np.uint8))


def write_raster(raster: Raster, path: str) -> None:
    """Write a raster as PNG (lossless, deterministic bytes)."""
    Image.fromarray(raster.data, mode="RGB").save(path, format="PNG")


def crop_tile(raster: Raster, tile: TileSpec) -> Raster:
    """Copy the tile window out of a raster."""
    if tile.origin_x + tile.width > raster.width or tile.origin_y + tile.height > raster.height:
        raise RasterIOError(f"tile {tile.tile_id} exceeds raster bounds")
    window = raster.data[
        tile.origin_y : tile.origin_y + tile.height,
        tile.origin_x : tile.origin_x + tile.width,
    ]
    return Raster(window.copy())


def _score_color(score: float) -> tuple[int, int, int]:
    t = min(max(score, 0.0), 1.0)
    return tuple(
        int(round(lo + t * (hi - lo)))
        for lo, hi in zip(LOW_SCORE_RGB, HIGH_SCORE_RGB)
    )


def render_overlay(raster: Raster, dets: list[Detection], stroke_px: int = 2) -> Raster:
    """Draw each detection's quad outline over a copy of the raster."""
    if stroke_px < 1:
        raise RasterIOError(f"stroke width must be >= 1, got {stroke_px}")
    img = Image.fromarray(raster.data.copy(), mode="RGB")
    draw = ImageDraw.Draw(img)
    for det in dets:
        pts = [tuple(p) for p in to_vertices(det.box).vertices]
        color = _score_color(det.score)
        # closed outline; ImageDraw.line honors the stroke width at joints
        draw.line(pts + [pts[0]], fill=color, width=stroke_px, joint="curve")
    return Raster(np.asarray(img, dtype=np.uint8))
