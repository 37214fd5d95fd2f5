"""Command-line pipeline: synthesize scenes, tile orthomosaics, stitch and
project detections into GeoJSON panel maps, evaluate, sample patches, and
render overlays.

Data goes to files or stdout; progress and warnings go to stderr. Every
command is deterministic given its inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .anchors import DEFAULT_ANGLES, DEFAULT_RATIOS, DEFAULT_SCALES, AnchorConfig
from .errors import (
    InvalidConfigError,
    PanelMapError,
    ParseError,
    RasterIOError,
    UnknownTileError,
    WorldFileError,
)
from .evaluation import IOU_SWEEP, evaluate, format_report_table, report_to_json
from .georef import GeoTransform, export_geojson, parse_world_file, serialize_world_file
from .raster_io import Raster, crop_tile, read_raster, render_overlay, write_raster
from .suppression import Detection, rotated_nms, score_filter
from .synth import farm_spec_from_json, generate_farm
from .tiling import (
    detections_from_jsonl,
    detections_to_jsonl,
    grid_from_manifest,
    grid_to_manifest,
    group_by_tile,
    plan_tiles,
    sample_patches,
    stitch,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_PARSE = 4
EXIT_INTERNAL = 5

_EPILOG = (
    "exit codes: 0 success; 2 invalid configuration or usage; "
    "3 missing input file; 4 unparseable or inconsistent input data; "
    "5 unexpected internal failure"
)


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable pipeline parameters with their stock defaults."""

    tile_size: int = 512
    overlap: int = 64
    nms_iou: float = 0.3
    dedup_iou: float = 0.5
    score_min: float = 0.5
    anchor_angles: tuple = DEFAULT_ANGLES
    anchor_scales: tuple = DEFAULT_SCALES
    anchor_ratios: tuple = DEFAULT_RATIOS
    anchor_stride: float = 16.0
    eval_ious: tuple = IOU_SWEEP
    eval_max_dets: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.overlap < 0 or self.tile_size <= self.overlap:
            raise InvalidConfigError(
                f"need tile_size > overlap >= 0, got {self.tile_size}/{self.overlap}"
            )
        for name in ("nms_iou", "dedup_iou", "score_min"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.eval_max_dets <= 0:
            raise InvalidConfigError(f"eval_max_dets must be positive, got {self.eval_max_dets}")
        if self.seed < 0:
            raise InvalidConfigError(f"seed must be non-negative, got {self.seed}")

    def anchor_config(self) -> AnchorConfig:
        return AnchorConfig(
            angles=tuple(self.anchor_angles),
            scales=tuple(self.anchor_scales),
            ratios=tuple(tuple(r) for r in self.anchor_ratios),
            stride=self.anchor_stride,
        )


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    return p.read_text()


def load_config(path: str | None, overrides: dict | None = None) -> PipelineConfig:
    """Merge defaults, optional config file, and CLI overrides (that order)."""
    data: dict = {}
    if path:
        text = _read_text(path)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file is not valid JSON: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise ParseError("config file must hold a JSON object")
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    for key in ("anchor_angles", "anchor_scales", "eval_ious"):
        if key in data:
            data[key] = tuple(data[key])
    if "anchor_ratios" in data:
        data["anchor_ratios"] = tuple(tuple(r) for r in data["anchor_ratios"])
    return PipelineConfig(**data)


def _config_overrides(args: argparse.Namespace) -> dict:
    keys = (
        "tile_size", "overlap", "nms_iou", "dedup_iou", "score_min",
        "eval_max_dets", "seed",
    )
    return {k: getattr(args, k, None) for k in keys}


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_output(text: str, out: str | None) -> None:
    """Send data to a file when requested, stdout otherwise."""
    if out:
        Path(out).write_text(text)
        _progress(f"wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_synth(args: argparse.Namespace) -> int:
    spec = farm_spec_from_json(_read_text(args.spec))
    raster, gt = generate_farm(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ortho_path = out_dir / "ortho.png"
    write_raster(Raster(raster), str(ortho_path))
    _progress(f"wrote {ortho_path}")

    flat = [Detection(box=b, score=1.0, tile_id="") for b in gt]
    gt_path = out_dir / "gt.jsonl"
    gt_path.write_text(detections_to_jsonl(flat))
    _progress(f"wrote {gt_path}")

    transform = GeoTransform(a=args.gsd, d=0.0, b=0.0, e=-args.gsd, c=args.west, f=args.north)
    wld_path = out_dir / "ortho.wld"
    wld_path.write_text(serialize_world_file(transform))
    _progress(f"wrote {wld_path}")
    return EXIT_OK


def cmd_tile(args: argparse.Namespace) -> int:
    config = load_config(args.config, _config_overrides(args))
    raster = read_raster(args.ortho)
    grid = plan_tiles(raster.width, raster.height, config.tile_size, config.overlap)
    out_dir = Path(args.out_dir)
    tiles_dir = out_dir / "tiles"
    tiles_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(grid_to_manifest(grid))
    _progress(f"wrote {manifest_path}")
    for tile in grid.tiles:
        write_raster(crop_tile(raster, tile), str(tiles_dir / f"{tile.tile_id}.png"))
    _progress(f"wrote {len(grid.tiles)} tiles to {tiles_dir}")
    return EXIT_OK


def cmd_map(args: argparse.Namespace) -> int:
    config = load_config(args.config, _config_overrides(args))
    if args.manifest:
        grid = grid_from_manifest(_read_text(args.manifest))
    else:
        raster = read_raster(args.ortho)
        grid = plan_tiles(raster.width, raster.height, config.tile_size, config.overlap)
    dets = detections_from_jsonl(_read_text(args.detections))
    per_tile = group_by_tile(dets)
    cleaned = {}
    for tile_id, tile_dets in per_tile.items():
        strong = score_filter(tile_dets, config.score_min)
        kept = rotated_nms(strong, config.nms_iou)
        cleaned[tile_id] = [strong[i] for i in kept]
    merged = stitch(cleaned, grid, config.dedup_iou)
    transform = parse_world_file(_read_text(args.world))
    doc = export_geojson(merged, transform, args.crs)
    _write_output(doc, args.out)
    _progress(f"mapped {len(merged)} panels")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = load_config(args.config, _config_overrides(args))
    preds = detections_from_jsonl(_read_text(args.pred))
    gts = [d.box for d in detections_from_jsonl(_read_text(args.gt))]
    report = evaluate(preds, gts, max_dets=config.eval_max_dets, ious=config.eval_ious)
    sys.stdout.write(format_report_table(report))
    if args.out_json:
        Path(args.out_json).write_text(report_to_json(report))
        _progress(f"wrote {args.out_json}")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    config = load_config(args.config, _config_overrides(args))
    try:
        doc = json.loads(_read_text(args.index))
        index = [(str(tid), bool(flag)) for tid, flag in doc]
    except json.JSONDecodeError as exc:
        raise ParseError(f"patch index is not valid JSON: {exc.msg}") from None
    except (TypeError, ValueError):
        raise ParseError("patch index must be a JSON list of [tile_id, has_panels] pairs") from None
    result = sample_patches(index, n_fg=args.n_fg, n_bg=args.n_bg, seed=config.seed)
    if result.fg_shortage:
        _progress(f"warning: only {len(result.fg_ids)} foreground patches available of {args.n_fg} requested")
    if result.bg_shortage:
        _progress(f"warning: only {len(result.bg_ids)} background patches available of {args.n_bg} requested")
    doc = {
        "fg": list(result.fg_ids),
        "bg": list(result.bg_ids),
        "fg_shortage": result.fg_shortage,
        "bg_shortage": result.bg_shortage,
    }
    _write_output(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    raster = read_raster(args.ortho)
    dets = detections_from_jsonl(_read_text(args.detections))
    overlay = render_overlay(raster, dets, stroke_px=args.stroke)
    write_raster(overlay, args.out)
    _progress(f"wrote {args.out}")
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    flagdefs = {
        "tile_size": (int, "tile edge length in pixels (default 512)"),
        "overlap": (int, "tile overlap in pixels (default 64)"),
        "nms_iou": (float, "per-tile NMS IoU threshold (default 0.3)"),
        "dedup_iou": (float, "cross-tile dedup IoU threshold (default 0.5)"),
        "score_min": (float, "minimum detection score kept (default 0.5)"),
        "eval_max_dets": (int, "detection cap for recall (default 300)"),
        "seed": (int, "random seed (default 0)"),
    }
    p.add_argument("--config", help="JSON config file; flags override its values")
    for name in names:
        typ, help_text = flagdefs[name]
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panelmap",
        description="Rotated-box solar panel mapping pipeline.",
        epilog=_EPILOG,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic farm scene", epilog=_EPILOG)
    p.add_argument("--spec", required=True, help="farm spec JSON file")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--gsd", type=float, default=0.025, help="ground sample distance in meters/pixel (default 0.025)")
    p.add_argument("--west", type=float, default=500000.0, help="world x of pixel (0,0) center (default 500000)")
    p.add_argument("--north", type=float, default=4000000.0, help="world y of pixel (0,0) center (default 4000000)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tile", help="plan and cut a tile grid over an orthomosaic", epilog=_EPILOG)
    p.add_argument("--ortho", required=True, help="orthomosaic image file")
    p.add_argument("--out-dir", required=True, help="output directory for manifest.json and tiles/")
    _add_config_flags(p, "tile_size", "overlap")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("map", help="stitch per-tile detections and export a GeoJSON panel map", epilog=_EPILOG)
    p.add_argument("--detections", required=True, help="per-tile detections JSONL file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="tile grid manifest JSON")
    src.add_argument("--ortho", help="orthomosaic image (grid planned from its size)")
    p.add_argument("--world", required=True, help="6-line world file")
    p.add_argument("--crs", default="", help="CRS label recorded in the output")
    p.add_argument("--out", help="output GeoJSON path (stdout if omitted)")
    _add_config_flags(p, "tile_size", "overlap", "nms_iou", "dedup_iou", "score_min")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("eval", help="evaluate predictions against ground truth", epilog=_EPILOG)
    p.add_argument("--pred", required=True, help="prediction JSONL file")
    p.add_argument("--gt", required=True, help="ground-truth JSONL file")
    p.add_argument("--out-json", help="also write the full JSON report here")
    _add_config_flags(p, "eval_max_dets")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="sample foreground/background patches from an index", epilog=_EPILOG)
    p.add_argument("--index", required=True, help="JSON list of [tile_id, has_panels] pairs")
    p.add_argument("--n-fg", type=int, default=10, help="foreground patches to draw (default 10)")
    p.add_argument("--n-bg", type=int, default=5, help="background patches to draw (default 5)")
    p.add_argument("--out", help="output JSON path (stdout if omitted)")
    _add_config_flags(p, "seed")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("render", help="draw detections over a raster", epilog=_EPILOG)
    p.add_argument("--ortho", required=True, help="raster to draw on")
    p.add_argument("--detections", required=True, help="detections JSONL in the raster pixel frame")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--stroke", type=int, default=2, help="outline width in pixels (default 2)")
    p.set_defaults(func=cmd_render)

    return parser


def _fail(exc: Exception, code: int) -> int:
    line = json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True)
    print(line, file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(exc, EXIT_MISSING)
    except (ParseError, WorldFileError, UnknownTileError) as exc:
        return _fail(exc, EXIT_PARSE)
    except RasterIOError as exc:
        return _fail(exc, EXIT_PARSE)
    except PanelMapError as exc:
        return _fail(exc, EXIT_CONFIG)
    except Exception as exc:  # pragma: no cover - safety net
        return _fail(exc, EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
