"""Geometry kernel tests: canonical form, vertex conversion, rotation, IoU."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelmap.errors import InvalidBoxError, NotARectangleError
from panelmap.geometry import (
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

from oracles import box_corners, raster_iou, rotate_pt

# Strategies: canonical boxes with a strict w < h gap so round trips cannot
# teeter on the square-degenerate w/h swap.
coords = st.floats(-100.0, 100.0)
base_w = st.floats(0.1, 50.0)
ratio = st.floats(1.001, 4.0)
angles = st.floats(-90.0, 90.0, exclude_min=True)


@st.composite
def boxes(draw):
    w = draw(base_w)
    return RotatedBox(draw(coords), draw(coords), w, w * draw(ratio), draw(angles))


def assert_box_close(a: RotatedBox, b: RotatedBox, rel=1e-6):
    assert a.cx == pytest.approx(b.cx, rel=rel, abs=1e-6)
    assert a.cy == pytest.approx(b.cy, rel=rel, abs=1e-6)
    assert a.w == pytest.approx(b.w, rel=rel)
    assert a.h == pytest.approx(b.h, rel=rel)
    dt = wrap_angle(a.theta - b.theta)
    assert dt == pytest.approx(0.0, abs=1e-4)


class TestCanonicalForm:
    def test_already_canonical(self):
        assert canonicalize(0, 0, 2, 4, 0) == RotatedBox(0, 0, 2, 4, 0)

    def test_swap_forces_quarter_turn(self):
        assert canonicalize(0, 0, 4, 2, 0) == RotatedBox(0, 0, 2, 4, 90.0)

    def test_wrap_large_angle(self):
        box = canonicalize(1, 1, 3, 5, 250)
        assert box == RotatedBox(1, 1, 3, 5, 70.0)
        # same point set as the unwrapped pose
        got = sorted(to_vertices(box).vertices)
        want = sorted(box_corners(1, 1, 3, 5, 250))
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-9)

    def test_wrap_angle_values(self):
        assert wrap_angle(250) == 70
        assert wrap_angle(-90) == 90
        assert wrap_angle(90) == 90
        assert wrap_angle(181) == 1
        assert wrap_angle(-181) == -1
        assert wrap_angle(0) == 0

    @pytest.mark.parametrize(
        "bad",
        [
            dict(cx=0, cy=0, w=4, h=2, theta=0),  # w > h
            dict(cx=0, cy=0, w=2, h=4, theta=-90),  # angle out of range
            dict(cx=0, cy=0, w=2, h=4, theta=91),
            dict(cx=0, cy=0, w=0, h=4, theta=0),
            dict(cx=0, cy=0, w=-1, h=4, theta=0),
            dict(cx=float("nan"), cy=0, w=2, h=4, theta=0),
            dict(cx=0, cy=float("inf"), w=2, h=4, theta=0),
        ],
    )
    def test_constructor_rejects_non_canonical(self, bad):
        with pytest.raises(InvalidBoxError):
            RotatedBox(**bad)

    @given(boxes())
    def test_canonicalize_idempotent(self, b):
        again = canonicalize(b.cx, b.cy, b.w, b.h, b.theta)
        assert again == b


class TestVertices:
    def test_axis_aligned(self):
        quad = to_vertices(RotatedBox(0, 0, 2, 4, 0))
        assert quad.vertices == ((-1.0, -2.0), (1.0, -2.0), (1.0, 2.0), (-1.0, 2.0))

    def test_quarter_turn_point_set(self):
        quad = to_vertices(RotatedBox(0, 0, 2, 4, 90))
        got = {(round(x, 9), round(y, 9)) for x, y in quad.vertices}
        assert got == {(-2.0, 1.0), (-2.0, -1.0), (2.0, -1.0), (2.0, 1.0)}

    def test_rotated_corner_value(self):
        # corner at offset (+w/2, +h/2) = (1, 2) rotated 30 degrees
        quad = to_vertices(RotatedBox(10, 5, 2, 4, 30))
        expect = (10 + math.sqrt(3) / 2 - 1, 5 + 0.5 + math.sqrt(3))
        assert quad.vertices[2] == pytest.approx(expect, abs=1e-12)

    @given(boxes())
    def test_corners_match_rotation_oracle(self, b):
        got = to_vertices(b).vertices
        want = box_corners(b.cx, b.cy, b.w, b.h, b.theta)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-9)

    def test_from_vertices_axis_aligned(self):
        quad = Quad(vertices=((-1, -2), (1, -2), (1, 2), (-1, 2)))
        assert from_vertices(quad) == RotatedBox(0, 0, 2, 4, 0)

    def test_from_vertices_round_trip_given_case(self):
        b = RotatedBox(3, 7, 1.5, 6, -45)
        assert_box_close(from_vertices(to_vertices(b)), b)

    def test_rejects_parallelogram(self):
        quad = Quad(vertices=((0, 0), (2, 0), (2.5, 1), (0.5, 1)))
        with pytest.raises(NotARectangleError) as err:
            from_vertices(quad)
        assert err.value.deviation > 0

    @given(boxes())
    def test_round_trip(self, b):
        assert_box_close(from_vertices(to_vertices(b)), b)

    @given(boxes())
    def test_rectangle_invariants(self, b):
        v = to_vertices(b).vertices
        sides = sorted(math.dist(v[i], v[(i + 1) % 4]) for i in range(4))
        assert sides[0] == pytest.approx(b.w, rel=1e-6)
        assert sides[1] == pytest.approx(b.w, rel=1e-6)
        assert sides[2] == pytest.approx(b.h, rel=1e-6)
        assert sides[3] == pytest.approx(b.h, rel=1e-6)
        d1 = math.dist(v[0], v[2])
        d2 = math.dist(v[1], v[3])
        assert d1 == pytest.approx(d2, rel=1e-6)
        assert d1 == pytest.approx(math.hypot(b.w, b.h), rel=1e-6)

    def test_square_round_trip_point_set(self):
        # squares may legitimately come back with theta shifted a quarter turn
        b = RotatedBox(5, 5, 3, 3, 30)
        back = from_vertices(to_vertices(b))
        got = sorted(to_vertices(back).vertices)
        want = sorted(to_vertices(b).vertices)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-9)


class TestRotation:
    def test_identity(self):
        b = RotatedBox(0, 0, 2, 4, 0)
        assert rotate_box(b, 0, (0, 0)) == b

    def test_quarter_turn_about_origin(self):
        got = rotate_box(RotatedBox(4, 0, 2, 4, 0), 90, (0, 0))
        assert_box_close(got, RotatedBox(0, 4, 2, 4, 90.0))

    def test_point_rotation(self):
        assert rotate_point(1, 0, 90, (0, 0)) == pytest.approx((0, 1), abs=1e-15)

    def test_vertices_match_per_vertex_rotation(self):
        b = RotatedBox(3, 1, 1, 2, 15)
        got = to_vertices(rotate_box(b, 37, (5, -2))).vertices
        want = [rotate_pt(x, y, 37, 5, -2) for x, y in to_vertices(b).vertices]
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-9)

    @given(boxes(), st.floats(-180, 180), st.tuples(coords, coords))
    def test_rotate_round_trip(self, b, angle, center):
        back = rotate_box(rotate_box(b, angle, center), -angle, center)
        assert back.cx == pytest.approx(b.cx, abs=1e-9)
        assert back.cy == pytest.approx(b.cy, abs=1e-9)
        assert wrap_angle(back.theta - b.theta) == pytest.approx(0, abs=1e-9)


class TestIoU:
    def test_identical_boxes(self):
        b = RotatedBox(3, -2, 1.5, 4, 27.5)
        assert rotated_iou(b, b) == 1.0

    def test_disjoint(self):
        assert rotated_iou(RotatedBox(0, 0, 2, 2, 0), RotatedBox(100, 100, 2, 2, 0)) == 0.0

    def test_offset_squares_one_third(self):
        a = RotatedBox(0, 0, 2, 2, 0)
        b = RotatedBox(1, 0, 2, 2, 0)
        assert rotated_iou(a, b) == pytest.approx(1 / 3, abs=1e-12)
        assert raster_iou(a, b) == pytest.approx(1 / 3, abs=2e-3)

    def test_rotated_square_closed_form(self):
        a = RotatedBox(0, 0, 2, 2, 0)
        b = RotatedBox(0, 0, 2, 2, 45)
        want = 1 / math.sqrt(2)  # == 8(sqrt(2)-1) / (8 - 8(sqrt(2)-1))
        assert rotated_iou(a, b) == pytest.approx(want, abs=1e-12)
        assert raster_iou(a, b) == pytest.approx(want, abs=2e-3)

    def test_contained_box(self):
        outer = RotatedBox(0, 0, 4, 4, 0)
        inner = RotatedBox(0, 0, 2, 2, 30)
        assert rotated_iou(outer, inner) == pytest.approx(4 / 16, abs=1e-12)

    def test_against_raster_oracle_sample(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = canonicalize(rng.uniform(-5, 5), rng.uniform(-5, 5),
                             rng.uniform(0.5, 6), rng.uniform(0.5, 6), rng.uniform(-90, 90))
            b = canonicalize(rng.uniform(-5, 5), rng.uniform(-5, 5),
                             rng.uniform(0.5, 6), rng.uniform(0.5, 6), rng.uniform(-90, 90))
            assert rotated_iou(a, b) == pytest.approx(raster_iou(a, b), abs=2e-3)

    @given(boxes(), boxes())
    def test_symmetric_and_bounded(self, a, b):
        v = rotated_iou(a, b)
        assert 0.0 <= v <= 1.0
        assert v == rotated_iou(b, a)

    @given(boxes())
    def test_self_iou_is_one(self, b):
        assert rotated_iou(b, b) == 1.0

    @settings(max_examples=50)
    @given(boxes(), boxes(), st.floats(-180, 180), st.tuples(coords, coords))
    def test_rigid_transform_invariance(self, a, b, angle, center):
        before = rotated_iou(a, b)
        after = rotated_iou(rotate_box(a, angle, center), rotate_box(b, angle, center))
        assert after == pytest.approx(before, abs=1e-9)

    def test_pairwise_matches_scalar(self):
        rng = np.random.default_rng(3)
        boxes_a = [
            canonicalize(rng.uniform(-5, 5), rng.uniform(-5, 5),
                         rng.uniform(0.5, 4), rng.uniform(0.5, 4), rng.uniform(-90, 90))
            for _ in range(8)
        ]
        boxes_b = boxes_a[:5]
        mat = pairwise_iou(boxes_a, boxes_b)
        assert mat.shape == (8, 5)
        for i, a in enumerate(boxes_a):
            for j, b in enumerate(boxes_b):
                assert mat[i, j] == pytest.approx(rotated_iou(a, b), abs=1e-12)

    def test_degenerate_area_treated_as_zero_overlap(self):
        tiny = RotatedBox(0, 0, 1e-7, 1e-6, 0)  # area 1e-13, under the guard
        assert tiny.area < 1e-12
        big = RotatedBox(0, 0, 2, 2, 0)
        assert rotated_iou(tiny, big) == 0.0
        assert rotated_iou(tiny, tiny) == 0.0
