"""Closed-form upper and lower bounds on the maximum coding number."""
from __future__ import annotations

import math
from typing import NamedTuple

from .topology import cyclic_ring_size, floor_ratio


class DomainError(ValueError):
    """A bound was evaluated outside the range where its formula is defined."""


def _check_sep(r: float, d: float) -> None:
    if not (r > 0 and d > 0):
        raise DomainError("radius and separation must be positive")
    if d >= r:
        raise DomainError(f"construction needs d < R (got d={d}, R={r})")


def ub_fixed_separation(r: float, d: float) -> float:
    """Strict upper bound 2*pi*R/d for any d-separated layout."""
    if d <= 0:
        raise DomainError("separation must be positive")
    return 2 * math.pi * r / d


def ub_square_grid(n: int) -> float:
    """Strict upper bound sqrt(4*pi*N) for the square grid."""
    if n < 1:
        raise DomainError("node count must be at least 1")
    return math.sqrt(4 * math.pi * n)


def cyclic_ring_count(i: int) -> int:
    return cyclic_ring_size(i)


def cyclic_total(r: float, d: float) -> int:
    """Nodes of the cyclic grid including the centre: 1 + sum of ring sizes."""
    return 1 + sum(cyclic_ring_size(i) for i in range(1, int(math.floor(r / d + 1e-12)) + 1))


def _angle_count(arg: float) -> int:
    if not -1.0 <= arg <= 1.0:
        raise DomainError(f"arccos argument {arg} outside [-1, 1]")
    angle = math.acos(arg)
    if angle == 0.0:
        raise DomainError("zero angular step: count is unbounded")
    return floor_ratio(2 * math.pi, angle)


def lb_cyclic_case1(r: float, d: float) -> int:
    """Achievable count on the first ring past R/2 when R is a multiple of 2d."""
    _check_sep(r, d)
    return _angle_count(1 - 2 * d * d / (r * r))


def lb_cyclic_case2(r: float, d: float) -> int:
    """Achievable count when the ring past R/2 sits at R/2 + d."""
    _check_sep(r, d)
    return _angle_count(r * r / (2 * (r / 2 + d) ** 2) - 1)


class SquareLowerBound(NamedTuple):
    delta: float
    phi: float
    omega: float
    count: int


def lb_square_grid(r: float, d: float) -> SquareLowerBound:
    """Ring construction around R/2 for the square grid.

    ``omega`` is evaluated at the ring width 1.5d, the largest width that
    still guarantees one node per angular step; ``delta`` is reported from
    its own formula.
    """
    _check_sep(r, d)
    delta = (math.sqrt(r * r + d * (5 * d + 4 * r)) - r) / 2
    phi = math.asin(math.sqrt(2) * d / math.sqrt(d * d + r * r))
    omega = math.asin(r / (math.sqrt(2) * (r + 1.5 * d)))
    return SquareLowerBound(delta, phi, omega, floor_ratio(2 * math.pi, phi + omega))


def stochastic_ub_curve(lam: float, epsilon: float) -> float:
    """Reference curve lambda**(1/2 + epsilon); carries no constant."""
    if lam <= 0 or epsilon < 0:
        raise DomainError("need lambda > 0 and epsilon >= 0")
    return lam ** (0.5 + epsilon)
