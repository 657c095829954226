"""Maximum local-network-coding number in single-relay wireless cells."""
__version__ = "0.1.0"

from .coding import (  # noqa: E402
    CodingResult,
    Combination,
    Flow,
    is_valid_combination,
    is_valid_flow,
    max_coding_number,
    max_coding_number_bruteforce,
    symmetric_completion,
)
from .topology import Cell, GridSpec, RandomSpec  # noqa: E402

__all__ = [
    "Cell",
    "CodingResult",
    "Combination",
    "Flow",
    "GridSpec",
    "RandomSpec",
    "is_valid_combination",
    "is_valid_flow",
    "max_coding_number",
    "max_coding_number_bruteforce",
    "symmetric_completion",
]
