"""Deterministic synthetic solar-farm scenes: gridded panel ground truth,
a flat-shaded raster rendering, and a stub detector that perturbs ground
truth instead of running a network. Used for end-to-end pipeline tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InvalidSpecError, ParseError
from .geometry import RotatedBox, canonicalize, rotate_box, to_vertices
from .suppression import Detection
from .tiling import TileGrid

BACKGROUND_RGB = (221, 218, 210)
PANEL_RGB = (30, 38, 48)


@dataclass(frozen=True)
class FarmSpec:
    """Layout of a synthetic panel farm on a blank canvas.

    orientation rotates the whole farm about the canvas center; jitter_px and
    jitter_deg add per-panel uniform noise in [-j, j].
    """

    rows: int = 6
    cols: int = 10
    panel_w: float = 20.0
    panel_h: float = 40.0
    pitch_x: float = 96.0
    pitch_y: float = 96.0
    orientation: float = 0.0
    jitter_px: float = 0.0
    jitter_deg: float = 0.0
    seed: int = 0
    canvas_w: int = 2048
    canvas_h: int = 2048

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidSpecError(f"need at least a 1x1 grid, got {self.rows}x{self.cols}")
        if self.panel_w <= 0 or self.panel_h <= 0:
            raise InvalidSpecError("panel dimensions must be positive")
        if self.pitch_x <= 0 or self.pitch_y <= 0:
            raise InvalidSpecError("pitch must be positive")
        if self.canvas_w < 1 or self.canvas_h < 1:
            raise InvalidSpecError("canvas dimensions must be positive")
        if self.jitter_px < 0 or self.jitter_deg < 0:
            raise InvalidSpecError("jitter half-widths must be >= 0")


def farm_spec_from_json(text: str) -> FarmSpec:
    """Build a FarmSpec from a JSON object; absent fields keep defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid farm spec JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("farm spec must be a JSON object")
    known = {f.name for f in fields(FarmSpec)}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown farm spec fields: {sorted(unknown)}")
    try:
        return FarmSpec(**doc)
    except TypeError as exc:
        raise ParseError(f"bad farm spec: {exc}") from None


def _fill_quad(img: np.ndarray, box: RotatedBox, color: tuple[int, int, int]) -> None:
    """Paint every pixel whose center falls inside the box."""
    verts = to_vertices(box).as_array()
    x0 = max(int(math.floor(verts[:, 0].min())), 0)
    x1 = min(int(math.ceil(verts[:, 0].max())) + 1, img.shape[1])
    y0 = max(int(math.floor(verts[:, 1].min())), 0)
    y1 = min(int(math.ceil(verts[:, 1].max())) + 1, img.shape[0])
    if x0 >= x1 or y0 >= y1:
        return
    xs = np.arange(x0, x1) + 0.5
    ys = np.arange(y0, y1) + 0.5
    al = math.radians(box.theta)
    ca, sa = math.cos(al), math.sin(al)
    u = ca * (xs[None, :] - box.cx) + sa * (ys[:, None] - box.cy)
    v = -sa * (xs[None, :] - box.cx) + ca * (ys[:, None] - box.cy)
    mask = (np.abs(u) <= box.w / 2) & (np.abs(v) <= box.h / 2)
    img[y0:y1, x0:x1][mask] = color


def generate_farm(spec: FarmSpec) -> tuple[np.ndarray, list[RotatedBox]]:
    """Generate the farm raster and its ground-truth boxes.

    Panels sit on a rows-by-cols grid centered in the canvas, the whole grid
    rotated by spec.orientation about the canvas center, each panel then
    jittered. Deterministic for a given spec.
    """
    rng = np.random.default_rng(spec.seed)
    noise = rng.uniform(-1.0, 1.0, size=(spec.rows * spec.cols, 3))
    center = (spec.canvas_w / 2.0, spec.canvas_h / 2.0)
    boxes: list[RotatedBox] = []
    k = 0
    for r in range(spec.rows):
        for c in range(spec.cols):
            cx = center[0] + (c - (spec.cols - 1) / 2.0) * spec.pitch_x
            cy = center[1] + (r - (spec.rows - 1) / 2.0) * spec.pitch_y
            base = canonicalize(cx, cy, spec.panel_w, spec.panel_h, 0.0)
            box = rotate_box(base, spec.orientation, center)
            box = canonicalize(
                box.cx + spec.jitter_px * noise[k, 0],
                box.cy + spec.jitter_px * noise[k, 1],
                box.w,
                box.h,
                box.theta + spec.jitter_deg * noise[k, 2],
            )
            verts = to_vertices(box).as_array()
            if (
                verts[:, 0].min() < 0 or verts[:, 0].max() > spec.canvas_w
                or verts[:, 1].min() < 0 or verts[:, 1].max() > spec.canvas_h
            ):
                raise InvalidSpecError(f"panel at grid row {r}, col {c} escapes the canvas")
            boxes.append(box)
            k += 1
    img = np.empty((spec.canvas_h, spec.canvas_w, 3), dtype=np.uint8)
    img[:] = BACKGROUND_RGB
    for box in boxes:
        _fill_quad(img, box, PANEL_RGB)
    return img, boxes


def stub_detector(
    gt: list[RotatedBox],
    noise_px: float = 0.0,
    noise_deg: float = 0.0,
    score_floor: float = 1.0,
    fp_rate: float = 0.0,
    fn_rate: float = 0.0,
    seed: int = 0,
) -> list[Detection]:
    """Emit detections by perturbing ground truth.

    Each kept gt is jittered by uniform noise and scored in
    [score_floor, 1]; round(fn_rate * n) boxes are dropped and
    round(fp_rate * n) spurious boxes added. All draws happen in a fixed
    order, so runs that differ only in noise magnitude perturb the same
    underlying random draws (scaled), which keeps degradation sweeps
    monotone. Deterministic per seed.
    """
    if not 0.0 <= fp_rate < 1.0 or not 0.0 <= fn_rate < 1.0:
        raise InvalidSpecError(f"rates must lie in [0, 1), got fp={fp_rate} fn={fn_rate}")
    if not 0.0 <= score_floor <= 1.0:
        raise InvalidSpecError(f"score_floor must lie in [0, 1], got {score_floor}")
    if noise_px < 0 or noise_deg < 0:
        raise InvalidSpecError("noise half-widths must be >= 0")
    n = len(gt)
    rng = np.random.default_rng(seed)
    unit = rng.uniform(-1.0, 1.0, size=(n, 3))
    score_u = rng.random(n)
    n_fn = round(fn_rate * n)
    dropped = set(rng.choice(n, size=n_fn, replace=False).tolist()) if n_fn else set()

    dets: list[Detection] = []
    for i, box in enumerate(gt):
        if i in dropped:
            continue
        jittered = canonicalize(
            box.cx + noise_px * unit[i, 0],
            box.cy + noise_px * unit[i, 1],
            box.w,
            box.h,
            box.theta + noise_deg * unit[i, 2],
        )
        score = score_floor + (1.0 - score_floor) * score_u[i]
        dets.append(Detection(box=jittered, score=score))

    n_fp = round(fp_rate * n)
    if n_fp:
        xs = [b.cx for b in gt]
        ys = [b.cy for b in gt]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
        for _ in range(n_fp):
            tmpl = gt[int(rng.integers(0, n))]
            cx = rng.uniform(min(xs) - span * 0.1, max(xs) + span * 0.1)
            cy = rng.uniform(min(ys) - span * 0.1, max(ys) + span * 0.1)
            scale = rng.uniform(0.8, 1.2)
            theta = rng.uniform(-90.0, 90.0)
            fp_box = canonicalize(cx, cy, tmpl.w * scale, tmpl.h * scale, theta)
            score = score_floor + (1.0 - score_floor) * rng.random()
            dets.append(Detection(box=fp_box, score=score))
    return dets


def detect_on_grid(
    gt: list[RotatedBox],
    grid: TileGrid,
    noise_px: float = 0.0,
    noise_deg: float = 0.0,
    score_floor: float = 1.0,
    fp_rate: float = 0.0,
    fn_rate: float = 0.0,
    seed: int = 0,
) -> dict[str, list[Detection]]:
    """Run the stub detector independently on every tile.

    A gt box belongs to a tile when all four of its corners lie inside the
    tile window; it is then expressed in tile-local coordinates. Panels
    inside several overlapping tiles are detected in each, which exercises
    cross-tile dedup downstream. Per-tile randomness is derived from
    (seed, tile index) so results do not depend on tile iteration order.
    """
    out: dict[str, list[Detection]] = {}
    for idx, tile in enumerate(grid.tiles):
        local_gt: list[RotatedBox] = []
        for box in gt:
            verts = to_vertices(box).as_array()
            if (
                verts[:, 0].min() >= tile.origin_x
                and verts[:, 0].max() <= tile.origin_x + tile.width
                and verts[:, 1].min() >= tile.origin_y
                and verts[:, 1].max() <= tile.origin_y + tile.height
            ):
                local_gt.append(
                    RotatedBox(box.cx - tile.origin_x, box.cy - tile.origin_y, box.w, box.h, box.theta)
                )
        tile_seed = int(np.random.SeedSequence([seed, idx]).generate_state(1)[0])
        dets = stub_detector(
            local_gt,
            noise_px=noise_px,
            noise_deg=noise_deg,
            score_floor=score_floor,
            fp_rate=fp_rate,
            fn_rate=fn_rate,
            seed=tile_seed,
        )
        out[tile.tile_id] = [
            Detection(box=d.box, score=d.score, tile_id=tile.tile_id, class_id=d.class_id)
            for d in dets
        ]
    return out
