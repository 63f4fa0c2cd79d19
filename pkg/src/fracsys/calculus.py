"""F^alpha-derivative and F^alpha-integral of scalar and matrix-valued functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DegeneratePointError, NumericError
from .fractal_set import contains, nearest_endpoint
from .mass import Staircase

RealFn = Callable[[float], float]


@dataclass(frozen=True)
class DerivEstimate:
    value: float
    step_used: float
    neighbor: float


def _neville_at_zero(nodes: Sequence[float], values: Sequence[float]) -> float:
    """Value at 0 of the interpolating polynomial through ``(nodes, values)``."""
    p = list(values)
    n = len(nodes)
    for level in range(1, n):
        for i in range(n - level):
            xi, xj = nodes[i], nodes[i + level]
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi)
    return p[0]


def f_alpha_derivative(
    f: RealFn,
    stair: Staircase,
    x: float,
    rtol: float = 1e-8,
    atol: float = 1e-12,
    max_refinements: int = 48,
    working_depth: int = 24,
    order: int = 4,
) -> DerivEstimate:
    """Limit of ``(f(y) - f(x)) / (S(y) - S(x))`` as ``y -> x`` through the set.

    Neighbours ``y`` are construction endpoints nearest to ``x +- h`` with ``h``
    halving each round.  The quotients are extrapolated to a vanishing staircase
    increment by polynomial (Neville) extrapolation over the last ``order``
    points.  Points outside the depth-``working_depth`` approximation get 0.
    """
    spec = stair.spec
    if not contains(spec, x, working_depth):
        return DerivEstimate(0.0, 0.0, x)
    lo, hi = spec.base
    fx, sx = f(x), stair(x)
    max_ratio = max(spec.ratios)
    nodes: list[float] = []
    quotients: list[float] = []
    estimates: list[float] = []
    last_y = x
    for k in range(1, max_refinements + 1):
        h = spec.length * 0.5**k
        depth = min(
            stair.evaluation_depth,
            max(1, math.ceil(math.log(h / (4.0 * spec.length)) / math.log(max_ratio))),
        )
        sides = (h, -h) if x + h <= hi else (-h, h)
        for step in sides:
            y = nearest_endpoint(spec, min(max(x + step, lo), hi), depth)
            ds = stair(y) - sx
            if y != x and ds != 0.0:
                break
        else:
            continue
        if nodes and ds == nodes[-1]:
            continue
        nodes.append(ds)
        quotients.append((f(y) - fx) / ds)
        last_y = y
        m = min(order, len(nodes))
        estimates.append(_neville_at_zero(nodes[-m:], quotients[-m:]))
        if len(estimates) >= 3:
            cur, prev = estimates[-1], estimates[-2]
            if abs(cur - prev) <= rtol * abs(cur) + atol:
                return DerivEstimate(cur, abs(last_y - x), last_y)
    if not nodes:
        raise DegeneratePointError(
            f"staircase increment vanishes for every neighbour of x={x}", {"x": x}
        )
    raise ConvergenceError(
        f"F^alpha-derivative at x={x} did not converge",
        {"x": x, "increments": nodes, "quotients": quotients, "estimates": estimates},
    )


class Bracket(NamedTuple):
    """Lower and upper Darboux-type sums; their midpoint is the integral."""

    lower: float
    upper: float

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def error(self) -> float:
        return self.upper - self.lower


def _eval_many(f: RealFn, xs: np.ndarray) -> np.ndarray:
    return np.array([f(float(t)) for t in xs], dtype=float)


def f_alpha_integral(
    f: RealFn,
    stair: Staircase,
    a: float,
    b: float,
    depth: int = 12,
    tol: float | None = None,
) -> Bracket:
    """Lower/upper sums of ``f`` against staircase increments on the depth-``depth`` cells.

    Extrema over each cell are estimated from its clipped endpoints and midpoint.
    Gaps carry no staircase increment and drop out.  With ``tol`` set, a bracket
    wider than ``tol`` raises :class:`ConvergenceError`.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    lefts, rights, masses = stair.cells(depth)
    lo = np.maximum(lefts, a)
    hi = np.minimum(rights, b)
    sel = hi > lo
    lo, hi, inc = lo[sel], hi[sel], masses[sel].copy()
    partial = (lefts[sel] < a) | (rights[sel] > b)
    for i in np.flatnonzero(partial):
        inc[i] = stair(hi[i]) - stair(lo[i])
    samples = np.stack([_eval_many(f, lo), _eval_many(f, 0.5 * (lo + hi)), _eval_many(f, hi)])
    if not np.all(np.isfinite(samples)):
        raise ValueError("integrand is unbounded (non-finite samples) on the interval")
    lower = float(np.sum(samples.min(axis=0) * inc))
    upper = float(np.sum(samples.max(axis=0) * inc))
    result = Bracket(lower, upper)
    if tol is not None and result.error > tol:
        raise ConvergenceError(
            f"integral bracket width {result.error:.3e} exceeds {tol:.3e} at depth {depth}",
            {"lower": lower, "upper": upper, "depth": depth},
        )
    return result


@dataclass(frozen=True)
class FractalMatrixFn:
    """Rectangular grid of real functions sharing one domain."""

    entries: tuple[tuple[RealFn, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("a fractal matrix needs at least one entry")
        if any(len(row) != len(rows[0]) for row in rows):
            raise ValueError("fractal matrix rows have unequal lengths")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def constant(cls, values) -> FractalMatrixFn:
        arr = np.atleast_2d(np.asarray(values, dtype=float))
        return cls(tuple(tuple(_const(v) for v in row) for row in arr.tolist()))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def __call__(self, t: float) -> np.ndarray:
        return np.array([[f(t) for f in row] for row in self.entries])


def _const(v: float) -> RealFn:
    return lambda t: v


def _elementwise(A: FractalMatrixFn, op: Callable[[RealFn], object]) -> list[list[object]]:
    out = []
    for i, row in enumerate(A.entries):
        out_row = []
        for j, fn in enumerate(row):
            try:
                out_row.append(op(fn))
            except NumericError as exc:
                raise type(exc)(f"entry ({i}, {j}): {exc}", {**exc.diagnostics, "entry": (i, j)}) from exc
        out.append(out_row)
    return out


def matrix_derivative(A: FractalMatrixFn, stair: Staircase, x: float, **kwargs) -> np.ndarray:
    vals = _elementwise(A, lambda fn: f_alpha_derivative(fn, stair, x, **kwargs).value)
    return np.array(vals, dtype=float)


def matrix_integral(
    A: FractalMatrixFn, stair: Staircase, a: float, b: float, depth: int = 12, tol: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    vals = _elementwise(A, lambda fn: f_alpha_integral(fn, stair, a, b, depth, tol))
    lower = np.array([[v.lower for v in row] for row in vals])
    upper = np.array([[v.upper for v in row] for row in vals])
    return lower, upper
