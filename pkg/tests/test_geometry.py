import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from baselinezone.geometry import (
    NEGATIVE,
    POSITIVE,
    ZERO,
    ConvexPolygon,
    contains,
    convex_hull,
    fatten,
    fatten_thin,
    hausdorff_distance,
    intersection_area,
    linf_point_polygon,
    linf_point_segment,
    linf_points_polygon,
    orientation,
    regular_polygon,
    symmetric_difference_area,
    thin,
)

UNIT = ConvexPolygon.box(0, 0, 1, 1)

coord = st.floats(0.0, 1.0, allow_nan=False)
point = st.tuples(coord, coord)
cloud = st.lists(point, min_size=3, max_size=25)


def test_orientation_examples():
    assert orientation((1, 0), (1, 1), (0, 1)) == POSITIVE
    assert orientation((0, 0), (1, 1), (2, 2)) == ZERO
    assert orientation((0, 0), (0, 1), (1, 0)) == NEGATIVE


def test_hull_drops_interior_point():
    h = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
    assert h == UNIT
    assert h.area == 1.0


def test_hull_single_point_and_empty():
    h = convex_hull([(0, 0)])
    assert len(h) == 1 and h.area == 0.0
    assert convex_hull([]).is_empty


def test_hull_collinear_is_segment():
    h = convex_hull([(0, 0), (0.5, 0.5), (1, 1)])
    assert h.to_list() == [[0.0, 0.0], [1.0, 1.0]]


def test_hull_of_random_points_contains_all(rng):
    pts = rng.random((100, 2))
    h = convex_hull(pts)
    assert h.area <= 1.0
    assert contains(h, pts).all()


def test_vertex_order_is_ccw_from_lexmin():
    h = convex_hull([(1, 1), (0, 1), (1, 0), (0, 0)])
    assert h.to_list() == [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


def test_contains_examples():
    assert contains(UNIT, (0.5, 0.5))
    assert contains(UNIT, (1, 1))
    assert not contains(UNIT, (1.0001, 0.5))


def test_contains_degenerate_polygons():
    seg = convex_hull([(0, 0), (1, 1)])
    assert contains(seg, (0.5, 0.5))
    assert not contains(seg, (0.5, 0.6))
    assert not contains(seg, (1.5, 1.5))
    pt = convex_hull([(0.3, 0.3)])
    assert contains(pt, (0.3, 0.3)) and not contains(pt, (0.3, 0.31))
    assert not contains(ConvexPolygon(), (0, 0))


def test_intersection_area_examples():
    assert intersection_area(UNIT, UNIT) == pytest.approx(1.0)
    assert intersection_area(UNIT, ConvexPolygon.box(2, 2, 3, 3)) == 0.0
    assert intersection_area(UNIT, ConvexPolygon.box(0.5, 0.5, 1.5, 1.5)) == pytest.approx(0.25)


def test_symmetric_difference_examples():
    assert symmetric_difference_area(UNIT, UNIT) == pytest.approx(0.0, abs=1e-15)
    assert symmetric_difference_area(UNIT, ConvexPolygon.box(2, 0, 3, 1)) == pytest.approx(2.0)
    assert symmetric_difference_area(UNIT, ConvexPolygon.box(0.5, 0.5, 1.5, 1.5)) == pytest.approx(1.5)


def test_fatten_thin_square():
    sq = ConvexPolygon.box(0.25, 0.25, 0.75, 0.75)
    fat, thn = fatten_thin(sq, 0.1)
    assert fat == ConvexPolygon.box(0.15, 0.15, 0.85, 0.85)
    assert thn.area == pytest.approx(0.09)
    assert np.allclose(thn.vertices, ConvexPolygon.box(0.35, 0.35, 0.65, 0.65).vertices)
    assert fatten_thin(sq, 0.0) == (sq, sq)
    assert thin(UNIT, 0.6).is_empty
    with pytest.raises(ValueError):
        fatten(sq, -0.1)


def test_hausdorff_examples():
    assert hausdorff_distance(UNIT, UNIT) == 0.0
    assert hausdorff_distance(UNIT, ConvexPolygon.box(0, 0, 2, 1)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        hausdorff_distance(UNIT, ConvexPolygon())


def test_hausdorff_of_fattening_is_delta():
    sq = ConvexPolygon.box(0.3, 0.3, 0.6, 0.7)
    assert hausdorff_distance(sq, fatten(sq, 0.05)) == pytest.approx(0.05)


def test_linf_point_segment_against_dense_sampling(rng):
    for _ in range(50):
        p, a, b = rng.random((3, 2))
        t = np.linspace(0, 1, 20001)[:, None]
        brute = np.abs(a + t * (b - a) - p).max(axis=1).min()
        assert linf_point_segment(p, a, b) == pytest.approx(brute, abs=1e-4)
        assert linf_point_segment(p, a, b) <= brute + 1e-12


def test_vectorized_distance_matches_scalar(rng):
    poly = convex_hull(rng.random((8, 2)))
    x = rng.random((300, 2)) * 1.4 - 0.2
    vec = linf_points_polygon(x, poly)
    ref = [linf_point_polygon(q, poly) for q in x]
    assert np.allclose(vec, ref, atol=1e-15)


def test_regular_polygon_area():
    assert regular_polygon((0.5, 0.5), 0.25).area == pytest.approx(math.pi / 16, abs=1e-4)


def test_polygon_json_round_trip():
    poly = convex_hull([(0.1, 0.2), (0.7, 0.1), (0.4, 0.9)])
    assert ConvexPolygon.from_json(poly.to_json()) == poly


# properties --------------------------------------------------------------------

@given(point, point, point)
def test_orientation_antisymmetric(a, b, c):
    assert orientation(a, b, c) == -orientation(a, c, b)


@given(cloud)
def test_hull_idempotent_and_order_free(pts):
    h = convex_hull(pts)
    assert convex_hull(h.vertices) == h
    assert convex_hull(pts[::-1]) == h


@given(cloud)
def test_hull_is_ccw_convex(pts):
    v = convex_hull(pts).vertices
    k = len(v)
    if k >= 3:
        for i in range(k):
            a, b, c = v[i], v[(i + 1) % k], v[(i + 2) % k]
            assert (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0


@given(cloud, cloud, cloud)
def test_symmetric_difference_is_pseudometric(p, q, r):
    a, b, c = convex_hull(p), convex_hull(q), convex_hull(r)
    dab = symmetric_difference_area(a, b)
    assert dab >= 0
    assert dab == pytest.approx(symmetric_difference_area(b, a), abs=1e-12)
    assert symmetric_difference_area(a, a) == pytest.approx(0.0, abs=1e-12)
    assert dab <= symmetric_difference_area(a, c) + symmetric_difference_area(c, b) + 1e-9
    assert intersection_area(a, b) <= min(a.area, b.area) + 1e-15


@given(cloud, st.floats(0.0, 0.2))
def test_offset_band_area_bound(pts, delta):
    s = convex_hull(pts)
    if s.area == 0:
        return
    fat, thn = fatten_thin(s, delta)
    band = fat.area - thn.area
    assert band <= 8 * delta + 1e-12
    assert contains(fat, s.vertices).all()
    if not thn.is_empty:
        assert contains(s, thn.vertices, eps=1e-9).all()


@given(cloud, cloud)
def test_hausdorff_symmetric(p, q):
    a, b = convex_hull(p), convex_hull(q)
    assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
