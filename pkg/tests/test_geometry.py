import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import linprog

from ncgeom.geometry import (
    convex_hull,
    distance,
    distance_matrix,
    is_connected,
    is_convex_position,
    perimeter,
)
from ncgeom.topology import make_rng

coord = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
point = st.tuples(coord, coord)


def test_distance_examples():
    assert distance((0, 0), (0, 0)) == 0
    assert distance((0.6, 0), (-0.6, 0)) == pytest.approx(1.2, abs=1e-15)
    assert distance((0.51, 0), (0, 0.51)) == pytest.approx(0.72124891681027847, rel=1e-14)


def test_is_connected_examples():
    assert is_connected((0, 0), (1, 0), 1.0)  # boundary is inclusive
    assert not is_connected((0.6, 0), (-0.6, 0), 1.0)
    assert is_connected((0.51, 0), (0, 0.51), 1.0)


@given(point, point, point)
def test_triangle_inequality(a, b, c):
    assert distance(a, c) <= (distance(a, b) + distance(b, c)) * (1 + 1e-12) + 1e-300


@given(point, point, st.floats(min_value=0.01, max_value=3))
def test_connectivity_symmetric(a, b, r):
    assert is_connected(a, b, r) == is_connected(b, a, r)
    assert distance(a, b) == distance(b, a)


def test_distance_matrix_agrees_with_scalar():
    xy = make_rng(3).random((30, 2))
    dm = distance_matrix(xy)
    for i in range(30):
        for j in range(30):
            assert dm[i, j] == distance(xy[i], xy[j])


def test_hull_square_with_center():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    assert sorted(convex_hull(pts)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_hull_triangle_and_collinear():
    tri = [(0, 0), (2, 0), (1, 1)]
    assert sorted(convex_hull(tri)) == sorted(tri)
    assert sorted(convex_hull([(0, 0), (1, 1), (2, 2)])) == [(0, 0), (2, 2)]


def test_hull_is_counter_clockwise():
    hull = convex_hull(make_rng(1).random((50, 2)))
    area2 = sum(
        hull[i].x * hull[(i + 1) % len(hull)].y - hull[(i + 1) % len(hull)].x * hull[i].y
        for i in range(len(hull))
    )
    assert area2 > 0


def _in_hull_lp(p, verts) -> bool:
    # p is a convex combination of verts iff this LP is feasible
    v = np.asarray(verts, dtype=float)
    a_eq = np.vstack([v.T, np.ones(len(v))])
    b_eq = np.array([p[0], p[1], 1.0])
    res = linprog(np.zeros(len(v)), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(v), method="highs")
    return res.status == 0


def test_hull_of_disk_sample_contains_everything():
    rng = make_rng(7)
    rho = np.sqrt(rng.random(100))
    th = 2 * np.pi * rng.random(100)
    pts = np.column_stack([rho * np.cos(th), rho * np.sin(th)])
    hull = convex_hull(pts)
    assert all(_in_hull_lp(p, hull) for p in pts)
    # every hull vertex is extreme: not a combination of the others
    for k, h in enumerate(hull):
        assert not _in_hull_lp(h, hull[:k] + hull[k + 1:])
    assert perimeter(hull) <= 2 * math.pi


def test_convex_position_examples():
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert is_convex_position(square)
    assert not is_convex_position(square + [(0.5, 0.5)])
    assert is_convex_position([(0, 0), (1, 0), (2, 0)])
    # a midpoint of a hull edge is a boundary point, not interior
    assert is_convex_position(square + [(0.5, 0.0)])


@given(st.lists(point, min_size=0, max_size=3))
def test_small_sets_always_convex(pts):
    assert is_convex_position(pts)


@given(st.lists(point, min_size=1, max_size=25))
def test_hull_vertices_in_convex_position(pts):
    assert is_convex_position(convex_hull(pts))


@given(st.lists(point, min_size=4, max_size=9, unique=True), st.data())
def test_convex_position_monotone_under_deletion(pts, data):
    assume(is_convex_position(pts))
    k = data.draw(st.integers(0, len(pts) - 1))
    assert is_convex_position(pts[:k] + pts[k + 1:])


@given(
    st.lists(point, min_size=4, max_size=9),
    st.floats(0, 2 * math.pi),
    st.floats(-5, 5),
    st.floats(-5, 5),
)
def test_convex_position_rigid_motion_invariant(pts, theta, tx, ty):
    # keep away from configurations within the tolerance band of degeneracy
    hull = convex_hull(pts)
    assume(len(hull) >= 3)
    c, s = math.cos(theta), math.sin(theta)
    moved = [(c * x - s * y + tx, s * x + c * y + ty) for x, y in pts]
    margins = []
    for p in pts:
        for i, a in enumerate(hull):
            b = hull[(i + 1) % len(hull)]
            ln = math.hypot(b[0] - a[0], b[1] - a[1])
            margins.append(abs((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / ln)
    assume(all(m == 0 or m > 1e-6 for m in margins))
    assert is_convex_position(moved) == is_convex_position(pts)
