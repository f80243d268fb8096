"""Small argument validators used at module boundaries."""

from __future__ import annotations

import math
from numbers import Real

import numpy as np


def check_fraction(value, name: str, *, low_open: bool = True, high_closed: bool = True) -> float:
    """Validate that ``value`` lies in (0, 1] (bounds configurable)."""
    if not isinstance(value, Real) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    lo_ok = value > 0 if low_open else value >= 0
    hi_ok = value <= 1 if high_closed else value < 1
    if not (lo_ok and hi_ok):
        lo = "(0" if low_open else "[0"
        hi = "1]" if high_closed else "1)"
        raise ValueError(f"{name} must lie in {lo}, {hi}, got {value!r}")
    return float(value)


def check_probability(value, name: str) -> float:
    return check_fraction(value, name, low_open=False, high_closed=True)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_finite_array(values, name: str, *, ndim: int = 1) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
