import math

import pytest
from hypothesis import settings

from ncgeom.topology import Cell

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def wheel(radius_of_ring: float, k: int = 4, r: float = 1.0) -> Cell:
    """``k`` nodes evenly spaced on a ring around the relay."""
    pts = [
        (radius_of_ring * math.cos(2 * math.pi * i / k), radius_of_ring * math.sin(2 * math.pi * i / k))
        for i in range(k)
    ]
    return Cell.from_points(pts, r)


@pytest.fixture
def wheel4():
    return wheel(0.51)


@pytest.fixture
def wide_square():
    return wheel(0.8)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
