import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncgeom.geometry import distance_matrix
from ncgeom.topology import (
    Cell,
    GridSpec,
    RandomSpec,
    cyclic_ring_size,
    gen_cyclic_grid,
    gen_poisson,
    gen_square_grid,
    gen_uniform,
    pairwise_min_distance,
    separation_for_count,
    square_grid_count,
    square_grid_interval,
)


def lattice_count_bruteforce(d, r=1.0):
    # independent count: integer pairs with (i d)^2 + (j d)^2 <= r^2, origin excluded
    k = int(r / d) + 1
    return sum(
        1
        for i in range(-k, k + 1)
        for j in range(-k, k + 1)
        if (i, j) != (0, 0) and math.hypot(i * d, j * d) <= r
    )


def test_square_grid_examples():
    assert len(gen_square_grid(GridSpec(2.5), 1.0)) == 0
    assert len(gen_square_grid(GridSpec(0.5), 1.0)) == 12
    assert lattice_count_bruteforce(0.5) == 12


@pytest.mark.parametrize("d", [0.9, 0.45, 0.3, 0.21, 0.137, 0.1, 0.0731])
def test_square_grid_count_matches_bruteforce(d):
    assert square_grid_count(d) == lattice_count_bruteforce(d)


@given(st.floats(min_value=0.05, max_value=1.5))
def test_square_grid_error_bound_and_separation(d):
    cell = gen_square_grid(GridSpec(d), 1.0)
    n = len(cell) + 1  # lattice sites including the relay's
    assert abs(n - math.pi / d**2) <= 2 * math.sqrt(2) * math.pi / d
    assert np.all(np.hypot(cell.xy[:, 0], cell.xy[:, 1]) <= 1.0)
    assert pairwise_min_distance(cell) >= d * (1 - 1e-12)


@pytest.mark.parametrize("n", [4, 12, 48, 80, 120])
def test_separation_for_count(n):
    ds = separation_for_count(n, probes=5)
    assert len(set(ds)) == 5
    assert ds == sorted(ds, reverse=True)
    assert all(lattice_count_bruteforce(d) == n for d in ds)
    lo, hi = square_grid_interval(n)
    assert lattice_count_bruteforce(hi) == n
    assert lattice_count_bruteforce(lo) != n


def test_unreachable_count_rejected():
    # with the relay on a lattice site the node count is always a multiple of 4
    with pytest.raises(ValueError):
        square_grid_interval(81)


def test_cyclic_rings():
    assert cyclic_ring_size(1) == 6
    assert cyclic_ring_size(2) == 12
    cell = gen_cyclic_grid(GridSpec(0.4, "cyclic"), 1.0)
    radii = np.round(np.hypot(cell.xy[:, 0], cell.xy[:, 1]), 12)
    assert sorted(set(radii.tolist())) == [0.4, 0.8]
    assert np.sum(radii == 0.4) == 6 and np.sum(radii == 0.8) == 12


@pytest.mark.parametrize("d", [0.4, 0.25, 0.1, 0.05])
def test_cyclic_spacing_and_total(d):
    cell = gen_cyclic_grid(GridSpec(d, "cyclic"), 1.0)
    rings = int(math.floor(1.0 / d + 1e-12))
    assert len(cell) == sum(cyclic_ring_size(i) for i in range(1, rings + 1))
    radii = np.hypot(cell.xy[:, 0], cell.xy[:, 1])
    for i in range(1, rings + 1):
        ring = cell.xy[np.isclose(radii, i * d)]
        dm = distance_matrix(ring)
        np.fill_diagonal(dm, np.inf)
        assert dm.min() >= d * (1 - 1e-9)


@pytest.mark.parametrize("i", range(1, 101))
def test_cyclic_ring_size_between_6i_and_2pi_i(i):
    # arccos(1 - x) >= sqrt(2x), so a ring never holds more than 2*pi*i nodes;
    # it holds at least 6i, so rings grow slightly faster than 6i
    assert 6 * i <= cyclic_ring_size(i) <= 2 * math.pi * i


@pytest.mark.parametrize("d", [0.1, 0.05, 0.02, 0.01])
def test_cyclic_total_approximation(d):
    k = int(math.floor(1.0 / d + 1e-12))
    total = 1 + len(gen_cyclic_grid(GridSpec(d, "cyclic"), 1.0))
    approx = 1 + 6 * k * (k + 1) // 2
    assert approx <= total
    assert total == pytest.approx(3 / d**2, rel=0.15)
    assert total == pytest.approx(math.pi / d**2, rel=0.1)


def test_cyclic_ring_rotation():
    a = gen_cyclic_grid(GridSpec(0.4, "cyclic"), 1.0)
    b = gen_cyclic_grid(GridSpec(0.4, "cyclic", ring_rotation=(0.1, 0.2)), 1.0)
    assert not np.allclose(a.xy, b.xy)
    assert np.allclose(np.hypot(*a.xy.T), np.hypot(*b.xy.T))


def test_uniform_basic():
    assert len(gen_uniform(RandomSpec("uniform-count", count=0, seed=1))) == 0
    a = gen_uniform(RandomSpec("uniform-count", count=50, seed=9))
    b = gen_uniform(RandomSpec("uniform-count", count=50, seed=9))
    assert a == b
    assert a != gen_uniform(RandomSpec("uniform-count", count=50, seed=10))


def test_uniform_mean_radius():
    cell = gen_uniform(RandomSpec("uniform-count", count=10_000, seed=2024), 1.0)
    assert np.mean(np.hypot(cell.xy[:, 0], cell.xy[:, 1])) == pytest.approx(2 / 3, rel=0.01)


def test_poisson():
    assert len(gen_poisson(RandomSpec("poisson", density=0.0, seed=1))) == 0
    spec = RandomSpec("poisson", density=100 / math.pi, seed=5)
    assert gen_poisson(spec) == gen_poisson(spec)
    counts = [len(gen_poisson(RandomSpec("poisson", density=100 / math.pi, seed=s))) for s in range(10_000)]
    # sample mean of 10^4 Poisson(100) draws: sigma of the mean is 0.1
    assert abs(np.mean(counts) - 100) < 3 * 0.1


def test_generated_nodes_are_valid():
    for s in range(20):
        cell = gen_uniform(RandomSpec("uniform-count", count=200, seed=s), 0.7)
        assert np.all(np.hypot(cell.xy[:, 0], cell.xy[:, 1]) <= 0.7)


def test_cell_invariants():
    with pytest.raises(ValueError):
        Cell.from_points([(1.5, 0)])
    with pytest.raises(ValueError):
        Cell(1.0, [1, 1], [[0, 0], [0.1, 0]])
    # a node exactly at distance R is kept
    assert len(Cell.from_points([(1.0, 0.0), (0.0, -1.0)])) == 2


def test_cell_json_roundtrip():
    cell = gen_uniform(RandomSpec("uniform-count", count=30, seed=4))
    doc = json.loads(cell.to_json())
    assert set(doc) == {"radius", "nodes"}
    assert set(doc["nodes"][0]) == {"id", "x", "y"}
    assert Cell.from_json(cell.to_json()) == cell


def test_cell_sorted_by_id():
    cell = Cell(1.0, [5, 2, 9], [[0.1, 0], [0.2, 0], [0.3, 0]])
    assert cell.ids.tolist() == [2, 5, 9]
    assert cell.position(5) == (0.1, 0.0)
    with pytest.raises(KeyError):
        cell.position(3)


def test_grid_pairwise_separation_exhaustive():
    d = separation_for_count(80)[0]
    cell = gen_square_grid(GridSpec(d))
    for a, b in itertools.combinations(cell.xy, 2):
        assert math.hypot(*(a - b)) >= d * (1 - 1e-12)
