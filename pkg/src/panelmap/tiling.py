"""Tile planning over large orthomosaics, per-tile detection lift/stitch,
and patch sampling for dataset assembly.

Also hosts the two interchange formats used between pipeline stages: the
detection JSON Lines record and the tile-grid manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, ParseError, UnknownTileError
from .geometry import RotatedBox, canonicalize
from .suppression import Detection, rotated_nms


@dataclass(frozen=True)
class TileSpec:
    """One tile window: global pixel offset of its top-left corner plus size."""

    tile_id: str
    origin_x: int
    origin_y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidConfigError(f"tile {self.tile_id} has non-positive size")
        if self.origin_x < 0 or self.origin_y < 0:
            raise InvalidConfigError(f"tile {self.tile_id} has negative origin")


@dataclass(frozen=True)
class TileGrid:
    """A planned tiling of one orthomosaic."""

    ortho_width: int
    ortho_height: int
    tile_size: int
    overlap: int
    tiles: tuple[TileSpec, ...]

    def __post_init__(self):
        if self.ortho_width <= 0 or self.ortho_height <= 0:
            raise InvalidConfigError("orthomosaic dimensions must be positive")
        if self.overlap < 0 or self.tile_size <= self.overlap:
            raise InvalidConfigError(
                f"need tile_size > overlap >= 0, got tile_size={self.tile_size} overlap={self.overlap}"
            )
        seen = set()
        for t in self.tiles:
            if t.tile_id in seen:
                raise InvalidConfigError(f"duplicate tile id {t.tile_id}")
            seen.add(t.tile_id)
            if t.origin_x + t.width > self.ortho_width or t.origin_y + t.height > self.ortho_height:
                raise InvalidConfigError(f"tile {t.tile_id} exceeds orthomosaic bounds")
            if t.width > self.tile_size or t.height > self.tile_size:
                raise InvalidConfigError(f"tile {t.tile_id} larger than tile_size")
        object.__setattr__(self, "_by_id", {t.tile_id: t for t in self.tiles})

    def tile(self, tile_id: str) -> TileSpec:
        try:
            return self._by_id[tile_id]
        except KeyError:
            raise UnknownTileError(tile_id) from None


def _axis_origins(dim: int, tile: int, stride: int) -> list[int]:
    """Tile start offsets along one axis: stride steps, last one clamped so
    the final tile ends exactly at the image edge."""
    origins: list[int] = []
    pos = 0
    while pos + tile < dim:
        origins.append(pos)
        pos += stride
    origins.append(dim - tile)
    out: list[int] = []
    for o in origins:
        if not out or o != out[-1]:
            out.append(o)
    return out


def plan_tiles(ortho_w: int, ortho_h: int, tile_size: int = 512, overlap: int = 64) -> TileGrid:
    """Plan a covering grid of tile windows.

    Interior tiles start at multiples of (tile_size - overlap); the last
    row/column is clamped to the image edge instead of padding past it. An
    orthomosaic smaller than tile_size along an axis gets a single tile of
    that axis extent.
    """
    if ortho_w <= 0 or ortho_h <= 0:
        raise InvalidConfigError(f"orthomosaic dims must be positive, got {ortho_w}x{ortho_h}")
    if overlap < 0 or tile_size <= overlap:
        raise InvalidConfigError(
            f"need tile_size > overlap >= 0, got tile_size={tile_size} overlap={overlap}"
        )
    stride = tile_size - overlap
    tw = min(tile_size, ortho_w)
    th = min(tile_size, ortho_h)
    xs = _axis_origins(ortho_w, tw, stride)
    ys = _axis_origins(ortho_h, th, stride)
    tiles = []
    for r, oy in enumerate(ys):
        for c, ox in enumerate(xs):
            tiles.append(TileSpec(f"t{r:04d}_{c:04d}", ox, oy, tw, th))
    return TileGrid(ortho_w, ortho_h, tile_size, overlap, tuple(tiles))


def tile_to_global(det: Detection, tile: TileSpec) -> Detection:
    """Lift a tile-local detection into global pixel coordinates."""
    b = det.box
    return Detection(
        box=RotatedBox(b.cx + tile.origin_x, b.cy + tile.origin_y, b.w, b.h, b.theta),
        score=det.score,
        tile_id=tile.tile_id,
        class_id=det.class_id,
    )


def stitch(
    per_tile_dets: dict[str, list[Detection]],
    grid: TileGrid,
    dedup_iou: float = 0.5,
) -> list[Detection]:
    """Lift every tile's detections to the global frame and deduplicate.

    Detections under the empty tile id are already global and pass through
    unshifted. Cross-tile duplicates of one physical panel are collapsed by
    greedy NMS at dedup_iou, keeping the highest-scoring copy. Output order
    is descending score. The result does not depend on dict insertion order.
    """
    lifted: list[Detection] = []
    for tile_id in sorted(per_tile_dets):
        if tile_id == "":
            lifted.extend(per_tile_dets[tile_id])
            continue
        tile = grid.tile(tile_id)
        for det in per_tile_dets[tile_id]:
            lifted.append(tile_to_global(det, tile))
    kept = rotated_nms(lifted, dedup_iou)
    return [lifted[i] for i in kept]


@dataclass(frozen=True)
class PatchSample:
    """Sampled patch ids plus flags for pools smaller than requested."""

    fg_ids: tuple[str, ...]
    bg_ids: tuple[str, ...]
    fg_shortage: bool = False
    bg_shortage: bool = False


def sample_patches(
    patch_index: list[tuple[str, bool]],
    n_fg: int = 10,
    n_bg: int = 5,
    seed: int = 0,
) -> PatchSample:
    """Draw unique foreground and background patches, uniformly per pool.

    A pool smaller than its request is returned whole with the shortage flag
    set. Deterministic for a given seed.
    """
    if n_fg < 0 or n_bg < 0:
        raise InvalidConfigError(f"sample counts must be >= 0, got n_fg={n_fg} n_bg={n_bg}")
    fg_pool = [tid for tid, has in patch_index if has]
    bg_pool = [tid for tid, has in patch_index if not has]
    rng = np.random.default_rng(seed)

    def draw(pool: list[str], n: int) -> tuple[tuple[str, ...], bool]:
        if len(pool) <= n:
            return tuple(pool), len(pool) < n
        idx = rng.choice(len(pool), size=n, replace=False)
        return tuple(pool[i] for i in idx), False

    fg_ids, fg_short = draw(fg_pool, n_fg)
    bg_ids, bg_short = draw(bg_pool, n_bg)
    return PatchSample(fg_ids, bg_ids, fg_short, bg_short)


# ---------------------------------------------------------------------------
# Interchange formats.

def detections_to_jsonl(dets: list[Detection]) -> str:
    """Serialize detections, one JSON object per line, keys sorted."""
    lines = []
    for d in dets:
        rec = {
            "tile_id": d.tile_id if d.tile_id is not None else "",
            "cx": d.box.cx,
            "cy": d.box.cy,
            "w": d.box.w,
            "h": d.box.h,
            "theta_deg": d.box.theta,
            "score": d.score,
        }
        lines.append(json.dumps(rec, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def detections_from_jsonl(text: str) -> list[Detection]:
    """Parse the JSON Lines detection format; boxes are canonicalized."""
    dets: list[Detection] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise ParseError(f"line {lineno}: expected a JSON object")
        try:
            box = canonicalize(
                float(rec["cx"]), float(rec["cy"]),
                float(rec["w"]), float(rec["h"]),
                float(rec["theta_deg"]),
            )
            tile_id = str(rec["tile_id"]) or None
            det = Detection(box=box, score=float(rec["score"]), tile_id=tile_id)
        except KeyError as exc:
            raise ParseError(f"line {lineno}: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        dets.append(det)
    return dets


def group_by_tile(dets: list[Detection]) -> dict[str, list[Detection]]:
    """Bucket detections by their tile_id (records with no tile use '')."""
    out: dict[str, list[Detection]] = {}
    for d in dets:
        out.setdefault(d.tile_id or "", []).append(d)
    return out


def grid_to_manifest(grid: TileGrid) -> str:
    """Serialize a tile grid as a deterministic JSON manifest."""
    doc = {
        "ortho_width": grid.ortho_width,
        "ortho_height": grid.ortho_height,
        "tile_size": grid.tile_size,
        "overlap": grid.overlap,
        "tiles": [
            {
                "tile_id": t.tile_id,
                "origin_x": t.origin_x,
                "origin_y": t.origin_y,
                "width": t.width,
                "height": t.height,
            }
            for t in grid.tiles
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def grid_from_manifest(text: str) -> TileGrid:
    """Parse a tile-grid manifest produced by grid_to_manifest."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid manifest JSON: {exc.msg}") from None
    try:
        tiles = tuple(
            TileSpec(
                str(t["tile_id"]), int(t["origin_x"]), int(t["origin_y"]),
                int(t["width"]), int(t["height"]),
            )
            for t in doc["tiles"]
        )
        return TileGrid(
            int(doc["ortho_width"]), int(doc["ortho_height"]),
            int(doc["tile_size"]), int(doc["overlap"]), tiles,
        )
    except KeyError as exc:
        raise ParseError(f"manifest missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"manifest field invalid: {exc}") from None
