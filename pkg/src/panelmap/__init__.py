"""Rotated-box solar panel mapping: geometry, anchors, suppression, tiling,
georeferencing, evaluation, and synthetic-scene tooling."""

from .anchors import (
    IGNORE,
    NEGATIVE,
    POSITIVE,
    AnchorAssignment,
    AnchorConfig,
    BoxDelta,
    DecodeResult,
    decode,
    encode,
    generate_anchors,
    match_anchors,
)
from .errors import (
    InvalidBoxError,
    InvalidConfigError,
    InvalidSpecError,
    NotARectangleError,
    PanelMapError,
    ParseError,
    RasterIOError,
    UnknownTileError,
    UnsupportedDepthError,
    WorldFileError,
)
from .evaluation import (
    MatchResult,
    MetricsReport,
    ThresholdMetrics,
    average_precision,
    average_recall,
    evaluate,
    format_report_table,
    match_at_threshold,
    report_to_json,
)
from .geometry import (
    Quad,
    RotatedBox,
    canonicalize,
    from_vertices,
    pairwise_iou,
    rotate_box,
    rotate_point,
    rotated_iou,
    to_vertices,
    wrap_angle,
)
from .georef import (
    GeoTransform,
    PanelFeature,
    export_geojson,
    geo_to_pixel,
    parse_world_file,
    pixel_to_geo,
    project_detection,
    serialize_world_file,
)
from .raster_io import Raster, crop_tile, read_raster, render_overlay, write_raster
from .suppression import Detection, rotated_nms, score_filter
from .synth import FarmSpec, detect_on_grid, farm_spec_from_json, generate_farm, stub_detector
from .tiling import (
    PatchSample,
    TileGrid,
    TileSpec,
    detections_from_jsonl,
    detections_to_jsonl,
    grid_from_manifest,
    grid_to_manifest,
    group_by_tile,
    plan_tiles,
    sample_patches,
    stitch,
    tile_to_global,
)

__version__ = "0.1.0"
