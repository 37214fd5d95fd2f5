"""Rotated anchor grids and box regression coding.

Anchors are laid out per feature-map cell as the cross product of angles,
scales, and aspect ratios. Deltas use the classic normalized-offset / log-size
parameterization with the angle term normalized by 180 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .geometry import RotatedBox, canonicalize, pairwise_iou, wrap_angle

# Decoded log-size ratios larger than this are clamped rather than exploded.
MAX_LOG_RATIO = 4.0

DEFAULT_ANGLES = (-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0)
DEFAULT_SCALES = (32.0, 64.0, 128.0, 256.0, 512.0)
DEFAULT_RATIOS = ((1.0, 2.0), (1.0, 1.0), (2.0, 1.0))

# Anchor match statuses.
POSITIVE = 1
NEGATIVE = 0
IGNORE = -1


@dataclass(frozen=True)
class AnchorConfig:
    """Anchor layout: every (angle, scale, ratio) triple at every cell."""

    angles: tuple[float, ...] = DEFAULT_ANGLES
    scales: tuple[float, ...] = DEFAULT_SCALES
    ratios: tuple[tuple[float, float], ...] = DEFAULT_RATIOS
    stride: float = 16.0

    def __post_init__(self):
        if not self.angles or not self.scales or not self.ratios:
            raise InvalidConfigError("anchor config needs non-empty angles, scales, and ratios")
        if self.stride <= 0 or not math.isfinite(self.stride):
            raise InvalidConfigError(f"stride must be a positive finite number, got {self.stride}")
        for s in self.scales:
            if s <= 0 or not math.isfinite(s):
                raise InvalidConfigError(f"scales must be positive finite numbers, got {s}")
        for rw, rh in self.ratios:
            if rw <= 0 or rh <= 0 or not math.isfinite(rw) or not math.isfinite(rh):
                raise InvalidConfigError(f"ratios must be pairs of positive numbers, got {(rw, rh)}")
        for a in self.angles:
            if not math.isfinite(a):
                raise InvalidConfigError(f"angles must be finite, got {a}")

    @property
    def per_location(self) -> int:
        return len(self.angles) * len(self.scales) * len(self.ratios)


@dataclass(frozen=True)
class BoxDelta:
    """Regression offsets from an anchor to a target box."""

    tx: float
    ty: float
    tw: float
    th: float
    ttheta: float

    def __post_init__(self):
        for name in ("tx", "ty", "tw", "th", "ttheta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfigError(f"delta field {name} must be finite")


@dataclass(frozen=True)
class DecodeResult:
    """Decoded box plus whether the size terms had to be clamped."""

    box: RotatedBox
    clamped: bool = False


@dataclass(frozen=True)
class AnchorAssignment:
    """Per-anchor match labels against a ground-truth set.

    status: POSITIVE / NEGATIVE / IGNORE per anchor.
    gt_index: matched gt for positives, -1 elsewhere.
    max_iou: best IoU each anchor achieved over all gts.
    """

    status: np.ndarray
    gt_index: np.ndarray
    max_iou: np.ndarray


def generate_anchors(config: AnchorConfig, fmap_w: int, fmap_h: int) -> list[RotatedBox]:
    """Enumerate anchors for a feature map, cell-major then angle, scale, ratio.

    Each anchor sits at its cell center ((i + 0.5) * stride) and keeps area
    scale**2 across aspect ratios.
    """
    if fmap_w <= 0 or fmap_h <= 0:
        raise InvalidConfigError(f"feature map dims must be positive, got {fmap_w}x{fmap_h}")
    # Per-cell shapes depend only on the config; compute once.
    shapes = []
    for angle in config.angles:
        for s in config.scales:
            for rw, rh in config.ratios:
                w = s * math.sqrt(rw / rh)
                h = s * math.sqrt(rh / rw)
                shapes.append((w, h, angle))
    anchors: list[RotatedBox] = []
    for j in range(fmap_h):
        cy = (j + 0.5) * config.stride
        for i in range(fmap_w):
            cx = (i + 0.5) * config.stride
            for w, h, angle in shapes:
                anchors.append(canonicalize(cx, cy, w, h, angle))
    return anchors


def encode(anchor: RotatedBox, gt: RotatedBox) -> BoxDelta:
    """Compute the regression delta that carries anchor onto gt."""
    dtheta = wrap_angle(gt.theta - anchor.theta)
    return BoxDelta(
        tx=(gt.cx - anchor.cx) / anchor.w,
        ty=(gt.cy - anchor.cy) / anchor.h,
        tw=math.log(gt.w / anchor.w),
        th=math.log(gt.h / anchor.h),
        ttheta=dtheta / 180.0,
    )


def decode(anchor: RotatedBox, delta: BoxDelta, max_log_ratio: float = MAX_LOG_RATIO) -> DecodeResult:
    """Apply a delta to an anchor; size terms beyond max_log_ratio are clamped."""
    tw, th = delta.tw, delta.th
    clamped = False
    if abs(tw) > max_log_ratio:
        tw = math.copysign(max_log_ratio, tw)
        clamped = True
    if abs(th) > max_log_ratio:
        th = math.copysign(max_log_ratio, th)
        clamped = True
    box = canonicalize(
        anchor.cx + delta.tx * anchor.w,
        anchor.cy + delta.ty * anchor.h,
        anchor.w * math.exp(tw),
        anchor.h * math.exp(th),
        anchor.theta + delta.ttheta * 180.0,
    )
    return DecodeResult(box=box, clamped=clamped)


def match_anchors(
    anchors: list[RotatedBox],
    gts: list[RotatedBox],
    pos_iou: float = 0.7,
    neg_iou: float = 0.3,
) -> AnchorAssignment:
    """Label each anchor positive / negative / ignore against the gt set.

    Positive when best IoU >= pos_iou, negative when < neg_iou, ignore in
    between. Every gt's own best anchor is forced positive so no gt goes
    unmatched; gts are applied in ascending index order, so on a shared best
    anchor the highest gt index wins. IoU ties break toward the lowest index.
    """
    if not anchors:
        raise InvalidConfigError("cannot match against an empty anchor list")
    if not 0.0 <= neg_iou <= pos_iou <= 1.0:
        raise InvalidConfigError(
            f"need 0 <= neg_iou <= pos_iou <= 1, got neg={neg_iou} pos={pos_iou}"
        )
    n = len(anchors)
    if not gts:
        return AnchorAssignment(
            status=np.full(n, NEGATIVE, dtype=np.int8),
            gt_index=np.full(n, -1, dtype=np.int64),
            max_iou=np.zeros(n, dtype=np.float64),
        )
    iou = pairwise_iou(anchors, gts)
    best_gt = np.argmax(iou, axis=1)  # argmax takes the first (lowest) index on ties
    max_iou = iou[np.arange(n), best_gt]

    status = np.full(n, IGNORE, dtype=np.int8)
    gt_index = np.full(n, -1, dtype=np.int64)
    status[max_iou < neg_iou] = NEGATIVE
    pos_mask = max_iou >= pos_iou
    status[pos_mask] = POSITIVE
    gt_index[pos_mask] = best_gt[pos_mask]

    for j in range(len(gts)):
        k = int(np.argmax(iou[:, j]))
        status[k] = POSITIVE
        gt_index[k] = j
    return AnchorAssignment(status=status, gt_index=gt_index, max_iou=max_iou)
