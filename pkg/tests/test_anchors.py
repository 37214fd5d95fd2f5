"""Anchor grid, delta coding, and anchor-gt matching tests."""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from panelmap.anchors import (
    IGNORE,
    NEGATIVE,
    POSITIVE,
    AnchorConfig,
    BoxDelta,
    decode,
    encode,
    generate_anchors,
    match_anchors,
)
from panelmap.errors import InvalidConfigError
from panelmap.geometry import RotatedBox, canonicalize, rotated_iou, wrap_angle

coords = st.floats(-50.0, 50.0)
base_w = st.floats(0.5, 30.0)
ratio = st.floats(1.001, 4.0)
angles = st.floats(-90.0, 90.0, exclude_min=True)


@st.composite
def boxes(draw):
    w = draw(base_w)
    return RotatedBox(draw(coords), draw(coords), w, w * draw(ratio), draw(angles))


class TestConfig:
    def test_defaults(self):
        cfg = AnchorConfig()
        assert cfg.angles == (-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0)
        assert cfg.scales == (32.0, 64.0, 128.0, 256.0, 512.0)
        assert cfg.ratios == ((1.0, 2.0), (1.0, 1.0), (2.0, 1.0))
        assert cfg.stride == 16.0
        assert cfg.per_location == 105

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(angles=()),
            dict(scales=()),
            dict(ratios=()),
            dict(stride=0.0),
            dict(stride=-2.0),
            dict(scales=(32.0, -1.0)),
            dict(ratios=((1.0, 0.0),)),
        ],
    )
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(InvalidConfigError):
            AnchorConfig(**kwargs)


class TestGenerate:
    def test_counts_default_config(self):
        cfg = AnchorConfig()
        assert len(generate_anchors(cfg, 1, 1)) == 105
        assert len(generate_anchors(cfg, 4, 4)) == 1680

    def test_count_formula_odd_config(self):
        cfg = AnchorConfig(angles=(0.0, 45.0), scales=(10.0,), ratios=((1.0, 3.0),), stride=8.0)
        assert len(generate_anchors(cfg, 3, 5)) == 3 * 5 * 2

    def test_unit_cell_anchor_geometry(self):
        cfg = AnchorConfig(angles=(0.0,), scales=(32.0,), ratios=((1.0, 1.0),), stride=16.0)
        (a,) = generate_anchors(cfg, 1, 1)
        assert a == RotatedBox(8.0, 8.0, 32.0, 32.0, 0.0)

    def test_area_preserved_across_ratios(self):
        cfg = AnchorConfig()
        anchors = generate_anchors(cfg, 1, 1)
        for a in anchors:
            # every anchor keeps the area of one of the configured scales
            assert min(abs(a.area - s * s) for s in cfg.scales) < 1e-6

    def test_cell_centers(self):
        cfg = AnchorConfig(angles=(0.0,), scales=(4.0,), ratios=((1.0, 2.0),), stride=10.0)
        anchors = generate_anchors(cfg, 2, 2)
        centers = [(a.cx, a.cy) for a in anchors]
        assert centers == [(5.0, 5.0), (15.0, 5.0), (5.0, 15.0), (15.0, 15.0)]

    def test_order_is_cell_major_then_angle_scale_ratio(self):
        cfg = AnchorConfig(angles=(0.0, 30.0), scales=(8.0, 16.0), ratios=((1.0, 2.0), (1.0, 1.0)), stride=4.0)
        anchors = generate_anchors(cfg, 2, 1)
        per_loc = cfg.per_location
        assert len(anchors) == 2 * per_loc
        first_cell = anchors[:per_loc]
        assert all(a.cx == 2.0 for a in first_cell)
        # within a cell: angle outermost, then scale, then ratio
        w_12 = 8.0 * math.sqrt(0.5)
        assert first_cell[0].theta == 0.0 and first_cell[0].w == pytest.approx(w_12)
        assert first_cell[1].theta == 0.0 and first_cell[1].w == pytest.approx(8.0)
        assert first_cell[2].theta == 0.0 and first_cell[2].w == pytest.approx(16.0 * math.sqrt(0.5))
        assert first_cell[4].theta == 30.0

    def test_bad_fmap_dims(self):
        with pytest.raises(InvalidConfigError):
            generate_anchors(AnchorConfig(), 0, 4)


class TestCoding:
    def test_identity_delta(self):
        a = RotatedBox(3, 4, 2, 6, 20)
        d = encode(a, a)
        assert d == BoxDelta(0.0, 0.0, 0.0, 0.0, 0.0)

    def test_translation_only(self):
        a = RotatedBox(0, 0, 2, 4, 0)
        g = RotatedBox(1, 2, 2, 4, 0)
        d = encode(a, g)
        assert d == BoxDelta(0.5, 0.5, 0.0, 0.0, 0.0)

    def test_angle_wrap_consistency(self):
        a = RotatedBox(0, 0, 2, 4, 0)
        g = canonicalize(0, 0, 2, 4, 91)  # wraps to -89
        assert g.theta == pytest.approx(-89.0)
        d = encode(a, g)
        assert d.ttheta == pytest.approx(-89.0 / 180.0)
        back = decode(a, d)
        assert not back.clamped
        assert back.box.theta == pytest.approx(-89.0, abs=1e-9)

    def test_zero_delta_decodes_to_anchor(self):
        a = RotatedBox(7, -3, 1.5, 5, -30)
        res = decode(a, BoxDelta(0, 0, 0, 0, 0))
        assert res.box == a
        assert not res.clamped

    def test_clamped_decode_flag(self):
        a = RotatedBox(0, 0, 2, 4, 0)
        res = decode(a, BoxDelta(0, 0, 10.0, 0, 0))
        assert res.clamped
        # size saturates at exp(4) times the anchor side
        assert max(res.box.w, res.box.h) == pytest.approx(2 * math.exp(4.0))

    def test_non_finite_delta_rejected(self):
        with pytest.raises(InvalidConfigError):
            BoxDelta(float("nan"), 0, 0, 0, 0)

    @given(boxes(), boxes())
    def test_round_trip(self, a, g):
        d = encode(a, g)
        # pairs beyond the decode clamp range cannot round-trip by design
        assume(abs(d.tw) < 4.0 and abs(d.th) < 4.0)
        res = decode(a, d)
        assert not res.clamped
        assert res.box.cx == pytest.approx(g.cx, rel=1e-6, abs=1e-6)
        assert res.box.cy == pytest.approx(g.cy, rel=1e-6, abs=1e-6)
        assert res.box.w == pytest.approx(g.w, rel=1e-6)
        assert res.box.h == pytest.approx(g.h, rel=1e-6)
        assert wrap_angle(res.box.theta - g.theta) == pytest.approx(0.0, abs=1e-6)

    @given(boxes(), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.5, 0.5))
    def test_decode_always_canonical(self, a, tx, ty, tw, th, tt):
        res = decode(a, BoxDelta(tx, ty, tw, th, tt))
        assert res.box.w <= res.box.h
        assert -90.0 < res.box.theta <= 90.0


def brute_labels(anchors, gts, pos_t, neg_t):
    """Reference assignment: naive loops over rotated_iou."""
    n = len(anchors)
    status = [IGNORE] * n
    gt_idx = [-1] * n
    for i, a in enumerate(anchors):
        best = 0.0
        bj = -1
        for j, g in enumerate(gts):
            v = rotated_iou(a, g)
            if v > best:
                best, bj = v, j
        if best >= pos_t:
            status[i] = POSITIVE
            gt_idx[i] = bj
        elif best < neg_t:
            status[i] = NEGATIVE
    for j, g in enumerate(gts):
        ious = [rotated_iou(a, g) for a in anchors]
        k = max(range(n), key=lambda i: (ious[i], -i))
        status[k] = POSITIVE
        gt_idx[k] = j
    return status, gt_idx


class TestMatching:
    def test_exact_anchor_is_positive(self):
        anchors = [RotatedBox(0, 0, 2, 4, 0), RotatedBox(50, 50, 2, 4, 0)]
        gts = [RotatedBox(0, 0, 2, 4, 0)]
        m = match_anchors(anchors, gts, pos_iou=0.7, neg_iou=0.3)
        assert m.status[0] == POSITIVE
        assert m.gt_index[0] == 0
        assert m.status[1] == NEGATIVE

    def test_disjoint_gt_best_anchor_forced_positive(self):
        anchors = [RotatedBox(0, 0, 2, 4, 0), RotatedBox(10, 10, 2, 4, 0)]
        gts = [RotatedBox(100, 100, 2, 4, 0)]
        m = match_anchors(anchors, gts)
        # all IoUs are zero; the gt's argmax (ties to lowest index) is forced positive
        assert m.status[0] == POSITIVE
        assert m.gt_index[0] == 0
        assert m.status[1] == NEGATIVE

    def test_shared_best_anchor_goes_to_highest_gt(self):
        # two gts disjoint from everything share anchor 0 as argmax; the
        # override runs in ascending gt order, so the later gt owns it
        anchors = [RotatedBox(0, 0, 2, 4, 0), RotatedBox(10, 10, 2, 4, 0)]
        gts = [RotatedBox(100, 100, 2, 4, 0), RotatedBox(210, 210, 2, 4, 0)]
        m = match_anchors(anchors, gts)
        assert m.status[0] == POSITIVE
        assert m.gt_index[0] == 1
        assert m.status[1] == NEGATIVE

    def test_empty_gts_all_negative(self):
        anchors = [RotatedBox(0, 0, 2, 4, 0)]
        m = match_anchors(anchors, [])
        assert (m.status == NEGATIVE).all()
        assert (m.gt_index == -1).all()

    def test_empty_anchors_error(self):
        with pytest.raises(InvalidConfigError):
            match_anchors([], [RotatedBox(0, 0, 2, 4, 0)])

    def test_bad_thresholds(self):
        anchors = [RotatedBox(0, 0, 2, 4, 0)]
        with pytest.raises(InvalidConfigError):
            match_anchors(anchors, [], pos_iou=0.3, neg_iou=0.7)
        with pytest.raises(InvalidConfigError):
            match_anchors(anchors, [], pos_iou=1.5, neg_iou=0.3)

    def test_matches_brute_reference(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            anchors = [
                canonicalize(rng.uniform(0, 30), rng.uniform(0, 30),
                             rng.uniform(2, 8), rng.uniform(2, 8), rng.uniform(-90, 90))
                for _ in range(10)
            ]
            gts = [
                canonicalize(rng.uniform(0, 30), rng.uniform(0, 30),
                             rng.uniform(2, 8), rng.uniform(2, 8), rng.uniform(-90, 90))
                for _ in range(2)
            ]
            m = match_anchors(anchors, gts, pos_iou=0.7, neg_iou=0.3)
            want_status, want_idx = brute_labels(anchors, gts, 0.7, 0.3)
            assert m.status.tolist() == want_status
            assert m.gt_index.tolist() == want_idx

    def test_every_gt_with_distinct_best_anchor_gets_one(self):
        anchors = [
            RotatedBox(10, 10, 4, 8, 0),
            RotatedBox(80, 80, 4, 8, 0),
            RotatedBox(40, 40, 4, 8, 0),
        ]
        # each gt overlaps its own anchor at IoU 0.6: below pos, above neg
        gts = [RotatedBox(11, 10, 4, 8, 0), RotatedBox(81, 80, 4, 8, 0)]
        m = match_anchors(anchors, gts, pos_iou=0.7, neg_iou=0.3)
        matched_gts = set(m.gt_index[m.status == POSITIVE].tolist())
        assert matched_gts == {0, 1}
        assert m.status[0] == POSITIVE and m.gt_index[0] == 0
        assert m.status[1] == POSITIVE and m.gt_index[1] == 1
        assert m.status[2] == NEGATIVE
        assert m.max_iou[0] == pytest.approx(0.6)
