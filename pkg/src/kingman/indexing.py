"""Integer level boundaries derived from fractional powers of n.

Window quantities use ceilings of n**alpha, truncated quantities use
floors.  Powers like 10000**0.25 land a hair away from an exact integer
in binary floating point, so values are snapped to the nearest integer
before rounding.
"""

from __future__ import annotations

import math

_SNAP = 1e-9


def _snapped_pow(n: int, alpha: float) -> float:
    t = float(n) ** alpha
    r = round(t)
    if abs(t - r) < _SNAP * max(1.0, abs(t)):
        return float(r)
    return t


def ceil_pow(n: int, alpha: float) -> int:
    """ceil(n**alpha) with integer snapping."""
    return math.ceil(_snapped_pow(n, alpha))


def floor_pow(n: int, alpha: float) -> int:
    """floor(n**alpha) with integer snapping."""
    return math.floor(_snapped_pow(n, alpha))


def check_window(alpha: float, beta: float) -> None:
    if not (0.0 <= alpha < beta <= 1.0):
        raise ValueError(f"window exponents must satisfy 0 <= alpha < beta <= 1, got ({alpha}, {beta})")
