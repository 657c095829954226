"""Flows, XOR-decodable combinations, and the maximum coding number of a cell."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .geometry import distance, distance_matrix, is_convex_position
from .topology import Cell

#: exact search refuses larger cells unless a call budget is given
MAX_EXACT_NODES = 100
BRUTE_SYMMETRIC_CAP = 14
BRUTE_ASYMMETRIC_CAP = 8


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class SizeError(ValueError):
    """The input is larger than the operation accepts."""


@dataclass(frozen=True, order=True)
class Flow:
    source: int
    destination: int

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("a flow needs distinct source and destination")

    def reverse(self) -> "Flow":
        return Flow(self.destination, self.source)


@dataclass(frozen=True)
class Combination:
    flows: frozenset[Flow] = field(default_factory=frozenset)

    def __init__(self, flows: Iterable[Flow] = ()):
        object.__setattr__(self, "flows", frozenset(flows))

    def __len__(self) -> int:
        return len(self.flows)

    def nodes(self) -> list[int]:
        return sorted({f.source for f in self.flows} | {f.destination for f in self.flows})

    def is_symmetric(self) -> bool:
        return all(f.reverse() in self.flows for f in self.flows)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Combination":
        flows = []
        for a, b in pairs:
            flows += [Flow(a, b), Flow(b, a)]
        return cls(flows)


@dataclass(frozen=True)
class CodingResult:
    max_number: int
    witness: Combination
    witness_nodes: tuple[int, ...]
    exact: bool = True

    def to_dict(self) -> dict:
        return {
            "max_number": self.max_number,
            "exact": self.exact,
            "nodes": list(self.witness_nodes),
            "flows": [{"s": f.source, "d": f.destination} for f in sorted(self.witness.flows)],
        }


def is_valid_flow(f: Flow, cell: Cell) -> bool:
    """Both endpoints are nodes of the cell and they are not neighbours."""
    a = cell.position(f.source)
    b = cell.position(f.destination)
    return distance(a, b) > cell.radius


def is_valid_combination(c: Combination, cell: Cell) -> bool:
    flows = list(c.flows)
    for f in flows:
        if not is_valid_flow(f, cell):
            return False
    if len({f.source for f in flows}) != len(flows) or len({f.destination for f in flows}) != len(flows):
        return False
    r = cell.radius
    for fi, fj in itertools.combinations(flows, 2):
        if distance(cell.position(fi.source), cell.position(fj.destination)) > r:
            return False
        if distance(cell.position(fj.source), cell.position(fi.destination)) > r:
            return False
    if len(flows) >= 3 and c.is_symmetric():
        # every node of a symmetric combination is a hull vertex
        pts = [cell.position(v) for v in c.nodes()]
        assert is_convex_position(pts, tol=1e-9 * r), "valid symmetric combination not in convex position"
    return True


def symmetric_completion(c: Combination, cell: Cell) -> Combination:
    """Add the reverse of every flow that lacks it.

    Raises :class:`ContractError` when ``c`` is not valid, and also when the
    completed set is not valid: that happens when a node is the destination of
    one flow and the source of a different one (a chain ``a->b->c``), where
    adding ``b->a`` gives ``b`` two outgoing flows.
    """
    if not is_valid_combination(c, cell):
        raise ContractError("symmetric_completion needs a valid combination")
    done = Combination(set(c.flows) | {f.reverse() for f in c.flows})
    if not is_valid_combination(done, cell):
        raise ContractError(
            "completion is not a valid combination; the input chains flows through a shared node"
        )
    return done


def _far_and_conn(cell: Cell) -> tuple[np.ndarray, np.ndarray]:
    dm = distance_matrix(cell.xy)
    return dm <= cell.radius, dm > cell.radius


def _result_from_nodes(cell: Cell, idx: list[int], far: np.ndarray, exact: bool) -> CodingResult:
    pairs = []
    chosen = set(idx)
    for i in idx:
        partners = [j for j in idx if far[i, j]]
        if len(partners) != 1 or partners[0] not in chosen:
            raise AssertionError("search returned a node set that is not an induced matching")
        if i < partners[0]:
            pairs.append((int(cell.ids[i]), int(cell.ids[partners[0]])))
    combo = Combination.from_pairs(pairs)
    nodes = tuple(int(cell.ids[i]) for i in sorted(idx))
    return CodingResult(len(combo), combo, nodes, exact)


def max_coding_number(cell: Cell, budget: int | None = None) -> CodingResult:
    """Exact maximum over symmetric combinations.

    A symmetric combination is a node set whose disconnection graph (edges
    between nodes farther apart than R) is a perfect matching, so the search
    is a maximum induced matching of that graph. Among maximum sets the
    lexicographically smallest sorted id tuple is returned.

    Cells above ``MAX_EXACT_NODES`` nodes need an explicit ``budget`` (number of
    search calls, 0 for unlimited). If the budget runs out, the result is the
    best combination found and carries ``exact=False``.
    """
    n = len(cell)
    if n > MAX_EXACT_NODES and budget is None:
        raise SizeError(
            f"exact search capped at {MAX_EXACT_NODES} nodes; pass a budget to search {n} nodes"
        )
    conn, far = _far_and_conn(cell)
    size, idx, exact = _kernels.max_induced_matching(
        _kernels.pack_rows(conn), _kernels.pack_rows(far), budget or 0
    )
    res = _result_from_nodes(cell, idx, far, bool(exact))
    assert res.max_number == size
    return res


def _pick(best, cand_size, cand_nodes):
    if best is None or cand_size > best[0] or (cand_size == best[0] and cand_nodes < best[1]):
        return (cand_size, cand_nodes)
    return best


def max_coding_number_bruteforce(cell: Cell, allow_asymmetric: bool = False) -> CodingResult:
    """Exhaustive oracle that tests combinations with :func:`is_valid_combination` directly.

    Validity is hereditary (every subset of a valid combination is valid), so
    the enumeration only extends sets that are still valid; nothing else is pruned.
    """
    ids = [int(i) for i in cell.ids]
    cap = BRUTE_ASYMMETRIC_CAP if allow_asymmetric else BRUTE_SYMMETRIC_CAP
    if len(ids) > cap:
        raise SizeError(f"brute force limited to {cap} nodes in this mode")
    if allow_asymmetric:
        units = [(Flow(a, b),) for a in ids for b in ids if a != b and is_valid_flow(Flow(a, b), cell)]
    else:
        units = [
            (Flow(a, b), Flow(b, a))
            for a, b in itertools.combinations(ids, 2)
            if is_valid_flow(Flow(a, b), cell)
        ]

    best: tuple[int, tuple[int, ...]] | None = (0, ())
    best_combo = Combination()

    def extend(start: int, flows: list[Flow]):
        nonlocal best, best_combo
        combo = Combination(flows)
        key = (len(combo), tuple(combo.nodes()))
        new = _pick(best, *key)
        if new != best:
            best, best_combo = new, combo
        for k in range(start, len(units)):
            trial = flows + list(units[k])
            if is_valid_combination(Combination(trial), cell):
                extend(k + 1, trial)

    extend(0, [])
    return CodingResult(best[0], best_combo, best[1])
