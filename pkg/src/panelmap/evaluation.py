"""Oriented-detection metrics: greedy IoU matching, 101-point interpolated
average precision, and average recall, swept over IoU thresholds
0.50:0.05:0.95 with AP75/AR75 called out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .geometry import RotatedBox, pairwise_iou
from .suppression import Detection

IOU_SWEEP = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
DEFAULT_MAX_DETS = 300
RECALL_SAMPLES = np.arange(101) / 100.0


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome at one IoU threshold.

    Per-detection arrays are ordered by descending score (ties by input
    index): matched flag and matched gt index (-1 for false positives).
    """

    iou_threshold: float
    scores: np.ndarray
    matched: np.ndarray
    gt_index: np.ndarray
    n_gt: int

    @property
    def tp(self) -> int:
        return int(np.count_nonzero(self.matched))

    @property
    def fp(self) -> int:
        return int(self.matched.size - self.tp)

    @property
    def fn(self) -> int:
        return self.n_gt - self.tp


def _match_sorted(iou: np.ndarray, order: list[int], scores: list[float], iou_t: float, n_gt: int) -> MatchResult:
    """Greedy matcher over a precomputed pred-by-gt IoU matrix."""
    matched = np.zeros(len(order), dtype=bool)
    gt_index = np.full(len(order), -1, dtype=np.int64)
    gt_taken = np.zeros(n_gt, dtype=bool)
    for rank, i in enumerate(order):
        best_j = -1
        best_iou = 0.0
        for j in range(n_gt):
            if not gt_taken[j] and iou[i, j] > best_iou:
                best_iou = iou[i, j]
                best_j = j
        if best_j >= 0 and best_iou >= iou_t:
            gt_taken[best_j] = True
            matched[rank] = True
            gt_index[rank] = best_j
    return MatchResult(
        iou_threshold=iou_t,
        scores=np.array([scores[i] for i in order], dtype=np.float64),
        matched=matched,
        gt_index=gt_index,
        n_gt=n_gt,
    )


def match_at_threshold(preds: list[Detection], gts: list[RotatedBox], iou_t: float) -> MatchResult:
    """Match predictions to ground truth at one IoU threshold.

    Predictions are visited in descending score order; each takes the
    unmatched gt with the highest IoU when that IoU reaches iou_t, ties to
    the lowest gt index.
    """
    if not 0.0 < iou_t <= 1.0:
        raise InvalidConfigError(f"iou threshold must lie in (0, 1], got {iou_t}")
    scores = [p.score for p in preds]
    order = sorted(range(len(preds)), key=lambda i: (-scores[i], i))
    if preds and gts:
        iou = pairwise_iou([p.box for p in preds], gts)
    else:
        iou = np.zeros((len(preds), len(gts)), dtype=np.float64)
    return _match_sorted(iou, order, scores, iou_t, len(gts))


def average_precision(match: MatchResult) -> float:
    """101-point interpolated AP from a match result.

    Precision is made monotone non-increasing right to left, then sampled at
    recalls 0.00, 0.01, ..., 1.00. Zero ground truth yields 0.
    """
    if match.n_gt == 0 or match.scores.size == 0:
        return 0.0
    tp_cum = np.cumsum(match.matched)
    fp_cum = np.cumsum(~match.matched)
    recall = tp_cum / match.n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    # right-to-left running max makes the envelope monotone
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_SAMPLES, side="left")
    sampled = np.where(idx < precision.size, precision[np.minimum(idx, precision.size - 1)], 0.0)
    return float(np.mean(sampled))


def average_recall(match: MatchResult, max_dets: int = DEFAULT_MAX_DETS) -> float:
    """Recall over the top-max_dets predictions by score.

    Greedy matching processes detections in score order, so truncating the
    matched flags is identical to matching on the truncated list. Zero
    ground truth yields 0.
    """
    if max_dets <= 0:
        raise InvalidConfigError(f"max_dets must be positive, got {max_dets}")
    if match.n_gt == 0:
        return 0.0
    return float(np.count_nonzero(match.matched[:max_dets]) / match.n_gt)


@dataclass(frozen=True)
class ThresholdMetrics:
    """AP/AR and match counts at a single IoU threshold."""

    iou: float
    ap: float
    ar: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class MetricsReport:
    """Sweep summary: ap/ar mean the IoU-averaged values; 50/75 variants fix
    the threshold. undefined flags an empty ground-truth set."""

    ap: float
    ar: float
    ap50: float
    ar50: float
    ap75: float
    ar75: float
    per_threshold: tuple[ThresholdMetrics, ...]
    n_gt: int
    n_pred: int
    undefined: bool


def evaluate(
    preds: list[Detection],
    gts: list[RotatedBox],
    max_dets: int = DEFAULT_MAX_DETS,
    ious: tuple[float, ...] = IOU_SWEEP,
) -> MetricsReport:
    """Evaluate predictions against ground truth over a sweep of IoU
    matching thresholds (default 0.50:0.05:0.95)."""
    if 0.50 not in ious or 0.75 not in ious:
        raise InvalidConfigError("iou sweep must include 0.50 and 0.75")
    scores = [p.score for p in preds]
    order = sorted(range(len(preds)), key=lambda i: (-scores[i], i))
    if preds and gts:
        iou = pairwise_iou([p.box for p in preds], gts)
    else:
        iou = np.zeros((len(preds), len(gts)), dtype=np.float64)
    rows = []
    for t in ious:
        match = _match_sorted(iou, order, scores, t, len(gts))
        rows.append(
            ThresholdMetrics(
                iou=t,
                ap=average_precision(match),
                ar=average_recall(match, max_dets),
                tp=match.tp,
                fp=match.fp,
                fn=match.fn,
            )
        )
    by_iou = {r.iou: r for r in rows}
    return MetricsReport(
        ap=float(np.mean([r.ap for r in rows])),
        ar=float(np.mean([r.ar for r in rows])),
        ap50=by_iou[0.50].ap,
        ar50=by_iou[0.50].ar,
        ap75=by_iou[0.75].ap,
        ar75=by_iou[0.75].ar,
        per_threshold=tuple(rows),
        n_gt=len(gts),
        n_pred=len(preds),
        undefined=len(gts) == 0,
    )


def format_report_table(report: MetricsReport) -> str:
    """Render the headline metrics as an aligned percent table."""
    headers = ("AP", "AR", "AP75", "AR75")
    values = (report.ap, report.ar, report.ap75, report.ar75)
    cells = [f"{100.0 * v:.1f}" for v in values]
    width = max(len(s) for s in headers + tuple(cells)) + 2
    head = "".join(h.rjust(width) for h in headers)
    body = "".join(c.rjust(width) for c in cells)
    return head + "\n" + body + "\n"


def report_to_json(report: MetricsReport) -> str:
    """Serialize the full report, including the per-threshold sweep."""
    doc = {
        "ap": report.ap,
        "ar": report.ar,
        "ap50": report.ap50,
        "ar50": report.ar50,
        "ap75": report.ap75,
        "ar75": report.ar75,
        "n_gt": report.n_gt,
        "n_pred": report.n_pred,
        "undefined": report.undefined,
        "per_threshold": [
            {"iou": r.iou, "ap": r.ap, "ar": r.ar, "tp": r.tp, "fp": r.fp, "fn": r.fn}
            for r in report.per_threshold
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
