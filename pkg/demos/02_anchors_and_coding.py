#!/usr/bin/env python3
"""Anchor grids, box delta coding, and training-label assignment.

Run: python3 demos/02_anchors_and_coding.py
"""

import numpy as np

from panelmap import (
    AnchorConfig,
    IGNORE,
    NEGATIVE,
    POSITIVE,
    canonicalize,
    decode,
    encode,
    generate_anchors,
    match_anchors,
)


def main():
    config = AnchorConfig()
    print(f"angles: {config.angles}")
    print(f"scales: {config.scales}")
    print(f"aspect ratios: {config.ratios}")
    print(f"anchors per grid cell: {config.per_location}")

    fmap_w, fmap_h = 4, 3
    anchors = generate_anchors(config, fmap_w, fmap_h)
    print(f"{fmap_w}x{fmap_h} feature map -> {len(anchors)} anchors")
    first = anchors[0]
    print(f"first anchor (cell 0,0, angle {config.angles[0]}, scale {config.scales[0]}, "
          f"ratio {config.ratios[0]}):")
    print(f"  cx={first.cx} cy={first.cy} w={first.w:.3f} h={first.h:.3f} theta={first.theta}")

    # Deltas express a target box relative to an anchor: offsets scaled by
    # anchor size, log size ratios, and a wrapped angle difference. Encoding
    # then decoding recovers the target to float precision.
    anchor = canonicalize(100.0, 80.0, 32.0, 64.0, 0.0)
    target = canonicalize(104.0, 74.0, 40.0, 56.0, 12.0)
    delta = encode(anchor, target)
    print("delta for a nearby target:")
    print(f"  tx={delta.tx:.4f} ty={delta.ty:.4f} tw={delta.tw:.4f} "
          f"th={delta.th:.4f} ttheta={delta.ttheta:.4f}")
    rebuilt = decode(anchor, delta)
    print(f"decoded back: cx={rebuilt.box.cx:.4f} cy={rebuilt.box.cy:.4f} "
          f"w={rebuilt.box.w:.4f} h={rebuilt.box.h:.4f} theta={rebuilt.box.theta:.4f} "
          f"(clamped={rebuilt.clamped})")

    # Extreme targets saturate the size channels instead of exploding.
    wild = encode(anchor, canonicalize(100.0, 80.0, 0.01, 0.02, 0.0))
    saturated = decode(anchor, wild)
    print(f"a 3200x-too-small target decodes clamped={saturated.clamped}")

    # Assignment labels every anchor against the ground truth set: positives
    # above 0.7 IoU, negatives below 0.3, the rest ignored. Each gt also
    # claims its single best anchor so nothing goes unmatched.
    gts = [
        canonicalize(56.0, 56.0, 30.0, 62.0, 5.0),
        canonicalize(40.0, 24.0, 8.0, 90.0, -45.0),
    ]
    assignment = match_anchors(anchors, gts)
    counts = {
        "positive": int(np.sum(assignment.status == POSITIVE)),
        "negative": int(np.sum(assignment.status == NEGATIVE)),
        "ignored": int(np.sum(assignment.status == IGNORE)),
    }
    print(f"assignment over {len(anchors)} anchors: {counts}")
    best = int(np.argmax(assignment.max_iou))
    print(f"best anchor overlaps gt {assignment.gt_index[best]} "
          f"at IoU {assignment.max_iou[best]:.3f}")


if __name__ == "__main__":
    main()
