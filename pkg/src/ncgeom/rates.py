"""Downlink throughput of a combination with and without coding, and the coding gain."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union


@dataclass(frozen=True)
class RateSpec:
    """Per-destination downlink rates (stored sorted ascending) and a packet size."""

    rates: tuple[float, ...]
    packet_size: float = 1.0

    def __post_init__(self):
        rates = tuple(sorted(float(x) for x in self.rates))
        if not rates:
            raise ValueError("rate vector is empty")
        if any(not (x > 0 and math.isfinite(x)) for x in rates):
            raise ValueError("rates must be positive and finite")
        if not self.packet_size > 0:
            raise ValueError("packet size must be positive")
        object.__setattr__(self, "rates", rates)

    @property
    def size(self) -> int:
        return len(self.rates)


RateLike = Union[RateSpec, Sequence[float]]


def _spec(spec: RateLike) -> RateSpec:
    return spec if isinstance(spec, RateSpec) else RateSpec(tuple(spec))


def _throughput(spec: RateSpec, representatives: Sequence[float]) -> Fraction:
    # C packets of size P over the airtime of one transmission per representative rate;
    # float inputs are exact rationals, so only the final conversion rounds
    p = Fraction(spec.packet_size)
    return spec.size * p / sum(p / Fraction(r) for r in representatives)


def _nc(s: RateSpec) -> Fraction:
    return _throughput(s, s.rates[:1])


def _without(s: RateSpec) -> Fraction:
    return _throughput(s, s.rates)


def _grouped(s: RateSpec, m: int) -> Fraction:
    if m < 1:
        raise ValueError("m must be at least 1")
    c = s.size
    reps = [s.rates[m * i] for i in range(c // m)]
    if c % m:
        reps.append(s.rates[c - c % m])
    return _throughput(s, reps)


def rate_nc(spec: RateLike) -> float:
    """All C packets in one coded transmission at the slowest rate."""
    return float(_nc(_spec(spec)))


def rate_without(spec: RateLike) -> float:
    """Native transmissions one by one: the harmonic mean of the rates."""
    return float(_without(_spec(spec)))


def rate_m(spec: RateLike, m: int) -> float:
    """Combinations of at most ``m`` consecutive ranked packets.

    Group ``i`` is sent at rank ``m*(i-1)+1``, its slowest member; a short
    last group is sent at rank ``C - rem(C, m) + 1``.
    """
    return float(_grouped(_spec(spec), m))


def gain(spec: RateLike) -> float:
    s = _spec(spec)
    return float(_nc(s) / _without(s))


def gain_m(spec: RateLike, m: int) -> float:
    s = _spec(spec)
    return float(_grouped(s, m) / _without(s))


def gain_m_lower_bound(spec: RateLike, m: int) -> float:
    """(m - 1) * r_1 / r_h."""
    s = _spec(spec)
    return float((m - 1) * Fraction(s.rates[0]) / _without(s))
