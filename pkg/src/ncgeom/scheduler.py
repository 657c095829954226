"""Relay downlink scheduling: coding graph and capped minimum clique partition."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coding import Flow, SizeError
from .geometry import distance
from .topology import Cell, make_rng

#: exact partition refuses graphs with more vertices than this
EXACT_PARTITION_CAP = 40
UNBOUNDED = None


@dataclass(frozen=True)
class Packet:
    id: int
    flow: Flow


@dataclass(frozen=True)
class CodingInstance:
    cell: Cell
    packets: tuple[Packet, ...]

    def __post_init__(self):
        ids = [p.id for p in self.packets]
        if len(set(ids)) != len(ids):
            raise ValueError("packet ids must be unique")
        for p in self.packets:
            self.cell.index_of(p.flow.source)
            self.cell.index_of(p.flow.destination)


@dataclass(frozen=True)
class CodingGraph:
    """Packets as vertices (in instance order) and a boolean adjacency matrix."""

    packet_ids: tuple[int, ...]
    adjacency: np.ndarray

    def __len__(self) -> int:
        return len(self.packet_ids)

    def edges(self) -> list[tuple[int, int]]:
        n = len(self)
        return [
            (self.packet_ids[i], self.packet_ids[j])
            for i in range(n)
            for j in range(i + 1, n)
            if self.adjacency[i, j]
        ]


@dataclass(frozen=True)
class Schedule:
    groups: tuple[tuple[int, ...], ...]
    slots_with_nc: int
    slots_without_nc: int

    @property
    def gain(self) -> float:
        return self.slots_without_nc / self.slots_with_nc if self.slots_with_nc else 1.0

    def to_dict(self) -> dict:
        return {
            "groups": [list(g) for g in self.groups],
            "slots_with_nc": self.slots_with_nc,
            "slots_without_nc": self.slots_without_nc,
            "gain": self.gain,
        }


def can_combine(p: Packet, q: Packet, cell: Cell) -> bool:
    """Each destination already holds the other packet (sent it, or overheard its source)."""
    r = cell.radius
    return (
        distance(cell.position(p.flow.source), cell.position(q.flow.destination)) <= r
        and distance(cell.position(q.flow.source), cell.position(p.flow.destination)) <= r
    )


def build_coding_graph(inst: CodingInstance) -> CodingGraph:
    n = len(inst.packets)
    adj = np.zeros((n, n), dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        if can_combine(inst.packets[i], inst.packets[j], inst.cell):
            adj[i, j] = adj[j, i] = True
    return CodingGraph(tuple(p.id for p in inst.packets), adj)


def _cap(m: int | None, n: int) -> int:
    if m is None:
        return max(n, 1)
    if m < 1:
        raise ValueError("cap must be at least 1")
    return m


def _as_groups(graph: CodingGraph, parts: list[list[int]]) -> list[tuple[int, ...]]:
    groups = [tuple(sorted(graph.packet_ids[i] for i in part)) for part in parts]
    return sorted(groups)


def _exact_partition(adj: np.ndarray, cap: int) -> list[list[int]]:
    """Fewest cliques of size <= cap covering every vertex.

    Branches on the uncovered vertex with the fewest uncovered neighbours and
    tries every clique through it (largest first). Since cliques are closed
    under taking subsets, covers and partitions have the same optimum.
    """
    n = adj.shape[0]
    nbr = [set(np.nonzero(adj[i])[0].tolist()) for i in range(n)]
    best: list[list[int]] = [[i] for i in range(n)]

    def cliques_through(v: int, pool: set[int]) -> list[list[int]]:
        found: list[list[int]] = []

        def grow(clique: list[int], cands: list[int], dropped: list[int]):
            # keep only cliques that are full or cannot be extended inside the pool
            if len(clique) == cap or (not cands and not dropped):
                found.append(clique)
                return
            for k, u in enumerate(cands):
                grow(
                    clique + [u],
                    [w for w in cands[k + 1:] if w in nbr[u]],
                    [w for w in dropped + cands[:k] if w in nbr[u]],
                )

        grow([v], sorted(nbr[v] & pool), [])
        found.sort(key=lambda c: (-len(c), c))
        return found

    def lower_bound(pool: set[int]) -> int:
        # greedy independent set: its members need distinct groups
        indep = 0
        left = set(pool)
        while left:
            v = min(left, key=lambda u: (len(nbr[u] & left), u))
            left -= nbr[v] | {v}
            indep += 1
        return max(indep, math.ceil(len(pool) / cap))

    def solve(pool: set[int], parts: list[list[int]]):
        nonlocal best
        if not pool:
            if len(parts) < len(best):
                best = [list(p) for p in parts]
            return
        if len(parts) + lower_bound(pool) >= len(best):
            return
        v = min(pool, key=lambda u: (len(nbr[u] & pool), u))
        for clique in cliques_through(v, pool - {v}):
            parts.append(clique)
            solve(pool - set(clique), parts)
            parts.pop()

    solve(set(range(n)), [])
    return best


def _greedy_partition(adj: np.ndarray, cap: int) -> list[list[int]]:
    """Repeatedly remove a largest capped clique; ties go to the smallest vertex set."""
    n = adj.shape[0]
    nbr = [set(np.nonzero(adj[i])[0].tolist()) for i in range(n)]
    left = set(range(n))
    parts = []

    def first_clique(k: int, pool: list[int]) -> list[int] | None:
        # depth-first in ascending order: the first k-clique found is lexicographically smallest
        def grow(clique, cands):
            if len(clique) == k:
                return clique
            for idx, u in enumerate(cands):
                if len(clique) + 1 + len(cands) - idx - 1 < k:
                    break
                found = grow(clique + [u], [w for w in cands[idx + 1:] if w in nbr[u]])
                if found:
                    return found
            return None

        return grow([], pool)

    while left:
        pool = sorted(left)
        for k in range(min(cap, len(pool)), 0, -1):
            clique = first_clique(k, pool)
            if clique:
                break
        parts.append(clique)
        left -= set(clique)
    return parts


def min_clique_partition(graph: CodingGraph, m: int | None = UNBOUNDED, mode: str = "exact") -> list[tuple[int, ...]]:
    """Partition packets into combinable groups of at most ``m`` packets.

    ``mode="exact"`` minimises the group count and refuses graphs above
    ``EXACT_PARTITION_CAP`` vertices; ``mode="greedy"`` has no size limit.
    """
    n = len(graph)
    cap = _cap(m, n)
    if n == 0:
        return []
    if mode == "exact":
        if n > EXACT_PARTITION_CAP:
            raise SizeError(f"exact partition limited to {EXACT_PARTITION_CAP} packets, got {n}")
        parts = _exact_partition(graph.adjacency, cap)
    elif mode == "greedy":
        parts = _greedy_partition(graph.adjacency, cap)
    else:
        raise ValueError(f"unknown partition mode {mode!r}")
    return _as_groups(graph, parts)


def throw_pairs(n_pairs: int, r: float, rng: np.random.Generator) -> Cell:
    """``n_pairs`` node pairs uniform in the disk; pair k is nodes (2k, 2k+1)."""
    from .topology import _uniform_disk

    xy = _uniform_disk(rng, 2 * n_pairs, r)
    return Cell(r, np.arange(2 * n_pairs), xy)


def pair_instance(cell: Cell) -> tuple[CodingInstance, int]:
    """Relay instance for a cell of consecutive node pairs.

    Returns the instance holding both packets of every pair that cannot talk
    directly, and the number of pairs that can.
    """
    packets = []
    direct = 0
    for k in range(len(cell) // 2):
        a, b = int(cell.ids[2 * k]), int(cell.ids[2 * k + 1])
        if distance(cell.position(a), cell.position(b)) <= cell.radius:
            direct += 1
            continue
        packets.append(Packet(len(packets), Flow(a, b)))
        packets.append(Packet(len(packets), Flow(b, a)))
    return CodingInstance(cell, tuple(packets)), direct


def schedule_instance(cell: Cell, m: int | None = UNBOUNDED, mode: str = "exact") -> Schedule:
    inst, direct = pair_instance(cell)
    relayed = len(inst.packets) // 2
    groups = min_clique_partition(build_coding_graph(inst), m, mode) if inst.packets else []
    return Schedule(
        groups=tuple(groups),
        slots_with_nc=2 * direct + 2 * relayed + len(groups),
        slots_without_nc=2 * direct + 4 * relayed,
    )


def run_realistic(n_pairs: int, r: float = 1.0, m: int | None = UNBOUNDED, seed: int = 0, mode: str = "exact") -> Schedule:
    """Throw ``n_pairs`` symmetric pairs and schedule one frame."""
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    cell = throw_pairs(n_pairs, r, make_rng(seed))
    return schedule_instance(cell, m, mode)


def exhaustive_partition_count(adj: np.ndarray, cap: int) -> int:
    """Oracle: smallest block count over every partition into capped cliques."""
    n = adj.shape[0]
    best = n

    def place(v: int, blocks: list[list[int]]):
        nonlocal best
        if len(blocks) >= best:
            return
        if v == n:
            best = len(blocks)
            return
        for blk in blocks:
            if len(blk) < cap and all(adj[v, u] for u in blk):
                blk.append(v)
                place(v + 1, blocks)
                blk.pop()
        blocks.append([v])
        place(v + 1, blocks)
        blocks.pop()

    place(0, [])
    return best if n else 0


def check_schedule(graph: CodingGraph, groups: Sequence[Sequence[int]], m: int | None) -> None:
    """Raise ``AssertionError`` unless ``groups`` partition the packets into capped cliques."""
    index = {pid: i for i, pid in enumerate(graph.packet_ids)}
    seen = [pid for g in groups for pid in g]
    assert sorted(seen) == sorted(graph.packet_ids), "groups do not partition the packets"
    cap = _cap(m, len(graph))
    for g in groups:
        assert len(g) <= cap, "group exceeds the cap"
        for a, b in itertools.combinations(g, 2):
            assert graph.adjacency[index[a], index[b]], "group is not pairwise decodable"
