"""Coarse-grained mass, mass function, gamma-dimension and integral staircase."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .fractal_set import RESOLUTION, IfsSpec, IntervalApprox, build_approximation

INFINITE_MASS = math.inf
DIVERGENCE_THRESHOLD = 1e12


def _check_args(alpha: float, a: float, b: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")


def coarse_mass(approx: IntervalApprox, alpha: float, a: float, b: float, mesh: float) -> float:
    """Sum of ``Gamma(alpha+1) * dt**alpha`` over flagged cells of the aligned partition.

    Breakpoints sit at the approximation endpoints clipped to ``[a, b]``.  Gaps
    are split off by vanishingly thin cells, so only retained intervals count;
    retained pieces longer than ``mesh`` are cut into equal cells.
    """
    _check_args(alpha, a, b)
    if not mesh > 0.0:
        raise ValueError(f"mesh must be positive, got {mesh}")
    lo = np.maximum(approx.lefts, a)
    hi = np.minimum(approx.rights, b)
    width = hi[hi > lo] - lo[hi > lo]
    # slack keeps float-rounded widths equal to the mesh from splitting
    pieces = np.maximum(np.ceil(width / mesh - 1e-9), 1.0)
    return math.gamma(alpha + 1.0) * float(np.sum(pieces * (width / pieces) ** alpha))


def aligned_mass(spec: IfsSpec, alpha: float, a: float, b: float, depth: int) -> float:
    """Closed-form value of :func:`coarse_mass` at the depth-``depth`` partition.

    Cells wholly inside ``[a, b]`` contribute ``len**alpha * s**(remaining depth)``
    with ``s = sum(ratio_i**alpha)``; only the cells straddling ``a`` or ``b`` are
    refined, so the cost is linear in ``depth`` rather than exponential.
    """
    _check_args(alpha, a, b)
    s = sum(r**alpha for r in spec.ratios)
    ratios = spec.ratios

    def rec(lo: float, hi: float, length: float, level: int) -> float:
        if hi <= a or lo >= b:
            return 0.0
        if a <= lo and hi <= b:
            return length**alpha * s ** (depth - level)
        if level == depth:
            return (min(hi, b) - max(lo, a)) ** alpha
        return sum(
            rec(clo, chi, length * r, level + 1)
            for (clo, chi), r in zip(spec.children(lo, hi), ratios)
        )

    lo, hi = spec.base
    return math.gamma(alpha + 1.0) * rec(lo, hi, spec.length, 0)


@dataclass(frozen=True)
class MassEstimate:
    value: float
    alpha: float
    depth_used: int
    converged: bool
    successive_delta: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def mass(
    spec: IfsSpec,
    alpha: float,
    a: float | None = None,
    b: float | None = None,
    tol: float = 1e-10,
    max_depth: int = 200,
) -> MassEstimate:
    """Limit of the coarse-grained mass along meshes ``max_ratio**k * length``.

    Stops once two successive values differ by at most ``tol``.  Sequences that
    pass ``DIVERGENCE_THRESHOLD`` are reported as infinite (and converged).
    """
    a = spec.base[0] if a is None else a
    b = spec.base[1] if b is None else b
    _check_args(alpha, a, b)
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    prev = aligned_mass(spec, alpha, a, b, 0)
    delta = math.inf
    for k in range(1, max_depth + 1):
        value = aligned_mass(spec, alpha, a, b, k)
        if value > DIVERGENCE_THRESHOLD:
            return MassEstimate(INFINITE_MASS, alpha, k, True, math.inf)
        delta = abs(value - prev)
        if delta <= tol:
            return MassEstimate(value, alpha, k, True, delta)
        prev = value
    return MassEstimate(prev, alpha, max_depth, False, delta)


@dataclass(frozen=True)
class DimensionEstimate:
    alpha_hat: float
    bracket: tuple[float, float]
    iterations: int


def _growth_rate(spec: IfsSpec, alpha: float, a: float, b: float, depth: int) -> float:
    v1 = aligned_mass(spec, alpha, a, b, depth)
    v2 = aligned_mass(spec, alpha, a, b, 2 * depth)
    if not (v1 > 0.0 and v2 > 0.0):
        return math.nan
    return (v2 / v1) ** (1.0 / depth)


def gamma_dimension(
    spec: IfsSpec,
    a: float | None = None,
    b: float | None = None,
    tol: float = 1e-6,
    probe_depth: int = 20,
) -> DimensionEstimate:
    """Bisection for the order at which the mass function drops from infinity to zero.

    An order is classified by the per-level growth factor of the coarse masses
    between depths ``probe_depth`` and ``2 * probe_depth``: above 1 the mass
    diverges (order below the dimension), below 1 it vanishes.
    """
    a = spec.base[0] if a is None else a
    b = spec.base[1] if b is None else b
    if not tol >= 1e-6:
        raise ValueError(f"tol must be at least 1e-6, got {tol}")
    trace: list[tuple[float, float]] = []

    def classify(alpha: float) -> int:
        g = _growth_rate(spec, alpha, a, b, probe_depth)
        trace.append((alpha, g))
        if math.isnan(g):
            return 0
        if g > 1.0 + 1e-12:
            return 1
        if g < 1.0 - 1e-12:
            return -1
        return 2

    lo, hi = tol * 1e-3, 1.0
    top, bottom = classify(hi), classify(lo)
    if top == 2:
        return DimensionEstimate(hi, (hi, hi), 0)
    if bottom == 2:
        return DimensionEstimate(lo, (lo, lo), 0)
    if top != -1 or bottom != 1:
        raise ConvergenceError(
            "coarse masses do not bracket a critical order on (0, 1]",
            {"trace": trace, "interval": (a, b)},
        )
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        iterations += 1
        verdict = classify(mid)
        if verdict == 2:
            return DimensionEstimate(mid, (mid, mid), iterations)
        if verdict == 0:
            raise ConvergenceError(
                f"vanishing coarse mass at alpha={mid}", {"trace": trace}
            )
        if verdict == 1:
            lo = mid
        else:
            hi = mid
    return DimensionEstimate(0.5 * (lo + hi), (lo, hi), iterations)


def _frac(x, lo, hi):
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


@dataclass(frozen=True)
class Staircase:
    """Integral staircase ``S(x)``: signed mass of the set between ``anchor`` and ``x``.

    Each map carries the fraction ``ratio_i**alpha / sum_j ratio_j**alpha`` of
    its parent's mass and gaps carry none.  Evaluation walks down the
    construction tree for ``evaluation_depth`` levels and interpolates linearly
    inside the final cell.
    """

    spec: IfsSpec
    alpha: float
    anchor: float
    total_mass: float
    evaluation_depth: int = 40
    weights: tuple[float, ...] = field(init=False, repr=False, compare=False)
    prefix: tuple[float, ...] = field(init=False, repr=False, compare=False)
    anchor_measure: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (math.isfinite(self.total_mass) and self.total_mass > 0.0):
            raise ValueError(f"total mass must be finite and positive, got {self.total_mass}")
        raw = [r**self.alpha for r in self.spec.ratios]
        total = sum(raw)
        weights = tuple(v / total for v in raw)
        prefix = [0.0]
        for wgt in weights:
            prefix.append(prefix[-1] + wgt)
        prefix[-1] = 1.0
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "anchor_measure", 0.0)
        object.__setattr__(self, "anchor_measure", self.measure(self.anchor))

    def measure(self, x: float) -> float:
        """Normalized mass of the set to the left of ``x`` (a value in [0, 1])."""
        spec = self.spec
        lo, hi = spec.base
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        acc, w = 0.0, 1.0
        prefix, weights = self.prefix, self.weights
        for _ in range(self.evaluation_depth):
            if not spec.resolvable(lo, hi):
                break
            width = hi - lo
            for i, (fl, fh) in enumerate(zip(spec.lo_frac, spec.hi_frac)):
                chi = lo + fh * width
                if x >= chi:
                    continue
                clo = lo + fl * width
                if x < clo:
                    return acc + w * prefix[i]
                acc += w * prefix[i]
                w *= weights[i]
                lo, hi = clo, chi
                break
            else:
                return acc + w
        return acc + w * min(max((x - lo) / (hi - lo), 0.0), 1.0)

    def measure_many(self, xs) -> np.ndarray:
        """Vectorized :meth:`measure`; identical floating-point decisions."""
        x = np.asarray(xs, dtype=float)
        flat = x.ravel()
        out = np.empty_like(flat)
        lo0, hi0 = self.spec.base
        below, above = flat <= lo0, flat >= hi0
        out[below], out[above] = 0.0, 1.0
        idx = np.flatnonzero(~(below | above))
        xv = flat[idx]
        lo = np.full(len(idx), lo0)
        hi = np.full(len(idx), hi0)
        acc = np.zeros(len(idx))
        w = np.ones(len(idx))
        prefix = np.array(self.prefix)
        weights = np.array(self.weights)
        m = len(self.weights)
        for _ in range(self.evaluation_depth):
            if len(idx) == 0:
                break
            width = hi - lo
            chis = np.stack([lo + fh * width for fh in self.spec.hi_frac])
            clos = np.stack([lo + fl * width for fl in self.spec.lo_frac])
            pos = np.sum(xv >= chis, axis=0)
            past_all = pos == m
            k = np.minimum(pos, m - 1)
            cols = np.arange(len(idx))
            clo, chi = clos[k, cols], chis[k, cols]
            in_gap = ~past_all & (xv < clo)
            done = past_all | in_gap
            out[idx[past_all]] = acc[past_all] + w[past_all]
            out[idx[in_gap]] = acc[in_gap] + w[in_gap] * prefix[k[in_gap]]
            go = ~done
            acc = acc[go] + w[go] * prefix[k[go]]
            w = w[go] * weights[k[go]]
            lo, hi, xv, idx = clo[go], chi[go], xv[go], idx[go]
            # unresolvable cells are finished by interpolation, as in the scalar path
            fine = ~(hi - lo > RESOLUTION * np.maximum(np.abs(lo), np.abs(hi)))
            if np.any(fine):
                out[idx[fine]] = acc[fine] + w[fine] * _frac(xv[fine], lo[fine], hi[fine])
                keep = ~fine
                lo, hi, xv, idx, acc, w = lo[keep], hi[keep], xv[keep], idx[keep], acc[keep], w[keep]
        if len(idx):
            out[idx] = acc + w * _frac(xv, lo, hi)
        return out.reshape(x.shape)

    def __call__(self, x: float) -> float:
        return self.total_mass * (self.measure(x) - self.anchor_measure)

    def evaluate_many(self, xs) -> np.ndarray:
        return self.total_mass * (self.measure_many(xs) - self.anchor_measure)

    def mass_between(self, a: float, b: float) -> float:
        """``gamma^alpha(F, a, b)`` read off the staircase."""
        return self.total_mass * (self.measure(b) - self.measure(a))

    def cells(self, depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Depth-``depth`` intervals with the staircase increment across each."""
        approx = build_approximation(self.spec, depth)
        w = np.ones(1)
        for _ in range(depth):
            w = np.outer(w, self.weights).ravel()
        return approx.lefts, approx.rights, self.total_mass * w


def make_staircase(
    spec: IfsSpec,
    alpha: float | None = None,
    anchor: float | None = None,
    evaluation_depth: int = 40,
    tol: float = 1e-10,
) -> Staircase:
    """Staircase normalized to the mass of the whole set at order ``alpha``.

    ``alpha`` defaults to the similarity dimension, the only order giving a
    finite nonzero mass.
    """
    alpha = spec.similarity_dimension if alpha is None else alpha
    est = mass(spec, alpha, tol=tol)
    if not est.converged or est.is_infinite or est.value <= 100 * tol:
        raise ValueError(
            f"mass at alpha={alpha} is {est.value} (converged={est.converged}); "
            "a staircase needs a finite nonzero mass"
        )
    anchor = spec.base[0] if anchor is None else anchor
    return Staircase(spec, alpha, anchor, est.value, evaluation_depth)


def staircase_eval(stair: Staircase, x: float) -> float:
    return stair(x)
