import itertools
import json

import numpy as np
import pytest

from conftest import wheel
from ncgeom.coding import Flow, SizeError
from ncgeom.scheduler import (
    CodingGraph,
    CodingInstance,
    Packet,
    build_coding_graph,
    can_combine,
    check_schedule,
    exhaustive_partition_count,
    min_clique_partition,
    pair_instance,
    run_realistic,
    schedule_instance,
)
from ncgeom.topology import Cell


def graph_from(adj):
    adj = np.asarray(adj, dtype=bool)
    return CodingGraph(tuple(range(adj.shape[0])), adj)


def clique(n):
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return graph_from(adj)


def random_graph(rng, n, p):
    upper = np.triu(rng.random((n, n)) < p, 1)
    return graph_from(upper | upper.T)


def test_can_combine_examples(wheel4, wide_square):
    a, b = Packet(0, Flow(0, 2)), Packet(1, Flow(2, 0))
    assert can_combine(a, b, wide_square)
    c, d = Packet(2, Flow(1, 3)), Packet(3, Flow(3, 1))
    assert all(can_combine(p, q, wheel4) for p, q in itertools.combinations([a, b, c, d], 2))
    assert not can_combine(a, c, wide_square)
    assert can_combine(a, c, wheel4) == can_combine(c, a, wheel4)


def test_coding_graph_shapes(wheel4, wide_square):
    inst = CodingInstance(wheel4, (Packet(0, Flow(0, 2)), Packet(1, Flow(2, 0))))
    assert build_coding_graph(inst).edges() == [(0, 1)]
    packets = tuple(Packet(i, f) for i, f in enumerate([Flow(0, 2), Flow(2, 0), Flow(1, 3), Flow(3, 1)]))
    assert len(build_coding_graph(CodingInstance(wheel4, packets)).edges()) == 6
    assert build_coding_graph(CodingInstance(wide_square, packets)).edges() == [(0, 1), (2, 3)]
    k = 4
    big = wheel(0.51, k=2 * k)
    pk = []
    for i in range(k):
        pk += [Packet(len(pk), Flow(i, i + k)), Packet(len(pk) + 1, Flow(i + k, i))]
    g = build_coding_graph(CodingInstance(big, tuple(pk)))
    assert len(g.edges()) == (2 * k) * (2 * k - 1) // 2


def test_instance_validation(wheel4):
    with pytest.raises(ValueError):
        CodingInstance(wheel4, (Packet(0, Flow(0, 2)), Packet(0, Flow(2, 0))))
    with pytest.raises(KeyError):
        CodingInstance(wheel4, (Packet(0, Flow(0, 9)),))


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_clique_examples(k):
    g = clique(2 * k)
    assert len(min_clique_partition(g, None)) == 1
    assert len(min_clique_partition(g, 2)) == k
    assert len(min_clique_partition(g, 1)) == 2 * k
    assert len(min_clique_partition(g, 2, mode="greedy")) == k


def test_partition_matches_exhaustive_oracle():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = int(rng.integers(1, 15))
        g = random_graph(rng, n, float(rng.uniform(0.2, 0.9)))
        for m in (1, 2, 3, 4, None):
            cap = n if m is None else m
            groups = min_clique_partition(g, m)
            check_schedule(g, groups, m)
            assert len(groups) == exhaustive_partition_count(g.adjacency, cap)
            greedy = min_clique_partition(g, m, mode="greedy")
            check_schedule(g, greedy, m)
            assert len(groups) <= len(greedy)


def test_partition_deterministic_and_sorted():
    g = random_graph(np.random.default_rng(3), 20, 0.6)
    a = min_clique_partition(g, 3)
    assert a == min_clique_partition(g, 3)
    assert a == sorted(a) and all(list(x) == sorted(x) for x in a)


def test_partition_limits():
    g = random_graph(np.random.default_rng(0), 41, 0.5)
    with pytest.raises(SizeError):
        min_clique_partition(g, 2)
    check_schedule(g, min_clique_partition(g, 2, mode="greedy"), 2)
    with pytest.raises(ValueError):
        min_clique_partition(g, 0, mode="greedy")
    with pytest.raises(ValueError):
        min_clique_partition(g, 2, mode="fastest")
    assert min_clique_partition(graph_from(np.zeros((0, 0))), 2) == []


def test_check_schedule_catches_errors():
    g = graph_from([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    check_schedule(g, [(0, 1), (2,)], 2)
    with pytest.raises(AssertionError):
        check_schedule(g, [(0, 1, 2)], None)
    with pytest.raises(AssertionError):
        check_schedule(g, [(0, 1)], 2)
    with pytest.raises(AssertionError):
        check_schedule(g, [(0, 1), (2,)], 1)


def test_single_valid_pair_is_four_thirds():
    sched = schedule_instance(Cell.from_points([(0.6, 0), (-0.6, 0)]), None)
    assert (sched.slots_without_nc, sched.slots_with_nc) == (4, 3)
    assert sched.gain == 4 / 3


def test_all_direct_pairs_gain_one():
    cell = Cell.from_points([(0.1, 0), (0.2, 0), (-0.1, 0.3), (-0.2, 0.1)])
    sched = schedule_instance(cell, None)
    assert sched.groups == () and sched.gain == 1


def test_slot_identity_and_json():
    for seed in range(30):
        s = run_realistic(10, m=None, seed=seed)
        inst_packets = sum(len(g) for g in s.groups)
        assert s.slots_without_nc - s.slots_with_nc == inst_packets - len(s.groups)
        assert s.gain >= 1
        doc = json.loads(json.dumps(s.to_dict()))
        assert set(doc) == {"groups", "slots_with_nc", "slots_without_nc", "gain"}


def test_gain_monotone_in_cap():
    for seed in range(60):
        gains = [run_realistic(12, m=m, seed=seed).gain for m in (1, 2, 4, None)]
        assert gains[0] == 1
        assert gains == sorted(gains)


def test_pair_instance_packets():
    cell = Cell.from_points([(0.6, 0), (-0.6, 0), (0.1, 0), (0.2, 0)])
    inst, direct = pair_instance(cell)
    assert direct == 1
    assert [p.flow for p in inst.packets] == [Flow(0, 1), Flow(1, 0)]


def test_run_realistic_rejects_zero_pairs():
    with pytest.raises(ValueError):
        run_realistic(0)
