"""Greedy rotated non-maximum suppression and score filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidConfigError
from .geometry import RotatedBox, rotated_iou


@dataclass(frozen=True)
class Detection:
    """One scored rotated box, optionally tagged with its source tile."""

    box: RotatedBox
    score: float
    tile_id: str | None = None
    class_id: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise InvalidConfigError(f"score must lie in [0, 1], got {self.score}")


def rotated_nms(dets: list[Detection], iou_thresh: float) -> list[int]:
    """Greedy NMS over rotated boxes.

    Candidates are visited in descending score (ties by ascending input
    index); each kept detection suppresses every remaining one whose IoU with
    it reaches iou_thresh. Returns kept indices into the input list in the
    visit order.
    """
    if not 0.0 <= iou_thresh <= 1.0:
        raise InvalidConfigError(f"iou_thresh must lie in [0, 1], got {iou_thresh}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    kept: list[int] = []
    alive = [True] * len(dets)
    for i in order:
        if not alive[i]:
            continue
        kept.append(i)
        alive[i] = False
        for j in order:
            if alive[j] and rotated_iou(dets[i].box, dets[j].box) >= iou_thresh:
                alive[j] = False
    return kept


def score_filter(dets: list[Detection], min_score: float) -> list[Detection]:
    """Keep detections scoring at least min_score, preserving input order."""
    if not 0.0 <= min_score <= 1.0:
        raise InvalidConfigError(f"min_score must lie in [0, 1], got {min_score}")
    return [d for d in dets if d.score >= min_score]
