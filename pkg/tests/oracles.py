"""Independent reference computations used only by the tests."""

from __future__ import annotations

import math

import mpmath
import numpy as np


def expm(M, squarings: int | None = None, terms: int = 30) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series."""
    M = np.asarray(M, dtype=float)
    norm = float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0
    if squarings is None:
        squarings = max(0, int(math.ceil(math.log2(norm))) + 4) if norm > 0 else 0
    X = M / 2.0**squarings
    term = np.eye(M.shape[0])
    total = term.copy()
    for k in range(1, terms):
        term = term @ X / k
        total = total + term
    for _ in range(squarings):
        total = total @ total
    return total


def gamma(x: float) -> float:
    return float(mpmath.gamma(mpmath.mpf(x)))


def cantor_function(x: float, digits: int = 60) -> float:
    """Classical middle-third Cantor function from the ternary expansion, in exact rationals."""
    from fractions import Fraction

    q = Fraction(x)
    if q <= 0:
        return 0.0
    if q >= 1:
        return 1.0
    acc, w = Fraction(0), Fraction(1, 2)
    for _ in range(digits):
        q *= 3
        d = int(q)
        q -= d
        if d == 1:
            return float(acc + w)
        acc += w * (d // 2)
        w /= 2
    return float(acc)
