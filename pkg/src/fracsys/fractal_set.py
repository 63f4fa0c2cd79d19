"""Cantor-like subsets of the real line given by affine iterated function systems.

A set is described exactly by an :class:`IfsSpec` (a base interval plus a list of
increasing affine contractions) and approximately by an :class:`IntervalApprox`,
the union of the images of the base interval under all length-``k`` words.

Child intervals are always computed from their parent ``[lo, hi]`` as
``lo + frac * (hi - lo)`` with per-map fractions fixed at construction.  The
staircase evaluator in :mod:`fracsys.mass` descends with the same expression, so
approximation endpoints and staircase breakpoints agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ResourceLimitError

DEFAULT_MAX_DEPTH = 40
DEFAULT_MAX_INTERVALS = 2**24
CONTAINMENT_RTOL = 1e-12
# cells narrower than this (relative to their position) are not subdivided further
RESOLUTION = 2.0**-44


@dataclass(frozen=True)
class IfsSpec:
    """Affine IFS ``x -> ratio * x + offset`` acting on ``base``.

    Maps are stored sorted by the position of their image.  The first image must
    start at the left end of the base interval and the last must end at its right
    end, so the base interval is the convex hull of the attractor and every
    construction endpoint belongs to the set.
    """

    base: tuple[float, float]
    maps: tuple[tuple[float, float], ...]
    lo_frac: tuple[float, ...] = field(init=False, repr=False, compare=False)
    hi_frac: tuple[float, ...] = field(init=False, repr=False, compare=False)
    similarity_dimension: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        a, b = (float(v) for v in self.base)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise ValueError(f"base interval must satisfy a < b, got {self.base!r}")
        maps = [(float(r), float(o)) for r, o in self.maps]
        if len(maps) < 2:
            raise ValueError("an IFS needs at least two maps")
        for r, o in maps:
            if not 0.0 < r < 1.0:
                raise ValueError(f"contraction ratio must lie in (0, 1), got {r}")
            if not math.isfinite(o):
                raise ValueError(f"offset must be finite, got {o}")
        maps.sort(key=lambda m: m[0] * a + m[1])
        length = b - a
        tol = CONTAINMENT_RTOL * length
        images = [(r * a + o, r * b + o) for r, o in maps]
        for lo, hi in images:
            if lo < a - tol or hi > b + tol:
                raise ValueError(f"image [{lo}, {hi}] leaves the base interval [{a}, {b}]")
        for (_, hi), (lo, _) in zip(images, images[1:]):
            if lo < hi - tol:
                raise ValueError("images of the base interval overlap")
        if abs(images[0][0] - a) > tol or abs(images[-1][1] - b) > tol:
            raise ValueError(
                "the outermost images must touch both ends of the base interval"
            )
        lo_frac = tuple((lo - a) / length for lo, _ in images)
        hi_frac = tuple(f + r for f, (r, _) in zip(lo_frac, maps))
        object.__setattr__(self, "base", (a, b))
        object.__setattr__(self, "maps", tuple(maps))
        object.__setattr__(self, "lo_frac", lo_frac)
        object.__setattr__(self, "hi_frac", hi_frac)
        object.__setattr__(self, "similarity_dimension", _similarity_dimension(self.ratios))

    @classmethod
    def cantor(cls, ratio: float = 1.0 / 3.0, base: tuple[float, float] = (0.0, 1.0)) -> IfsSpec:
        """Two-piece symmetric Cantor set keeping a fraction ``ratio`` at each end."""
        a, b = base
        return cls(base, ((ratio, a - ratio * a), (ratio, b - ratio * b)))

    @classmethod
    def interval(cls, base: tuple[float, float] = (0.0, 1.0)) -> IfsSpec:
        """The whole interval, written as two half-size copies (dimension 1)."""
        return cls.cantor(0.5, base)

    @staticmethod
    def resolvable(lo, hi):
        """Whether child bounds of ``[lo, hi]`` are still distinguishable in floating point."""
        return hi - lo > RESOLUTION * max(abs(lo), abs(hi))

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.maps)

    @property
    def length(self) -> float:
        return self.base[1] - self.base[0]

    @property
    def tolerance(self) -> float:
        return CONTAINMENT_RTOL * self.length

    def children(self, lo, hi):
        """Child bounds of ``[lo, hi]``; works on scalars and numpy arrays alike."""
        w = hi - lo
        return [(lo + fl * w, lo + fh * w) for fl, fh in zip(self.lo_frac, self.hi_frac)]


def _similarity_dimension(ratios: Sequence[float]) -> float:
    lo, hi = 0.0, 1.0
    # sum(r**alpha) is decreasing in alpha; disjoint images keep the root in (0, 1]
    if sum(ratios) >= 1.0:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sum(r**mid for r in ratios) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class IntervalApprox:
    """Depth-``k`` union of closed intervals, stored as sorted endpoint arrays."""

    depth: int
    lefts: np.ndarray
    rights: np.ndarray
    source: IfsSpec

    def __len__(self) -> int:
        return len(self.lefts)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lefts.tolist(), self.rights.tolist()))

    def gaps(self) -> list[tuple[float, float]]:
        """Open gaps between consecutive intervals."""
        return list(zip(self.rights[:-1].tolist(), self.lefts[1:].tolist()))

    def endpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self.lefts, self.rights]))


def build_approximation(
    spec: IfsSpec,
    depth: int,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_intervals: int = DEFAULT_MAX_INTERVALS,
) -> IntervalApprox:
    """All images of the base interval under length-``depth`` compositions."""
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    if depth > max_depth:
        raise ResourceLimitError(f"depth {depth} exceeds the cap {max_depth}")
    count = len(spec.maps) ** depth
    if count > max_intervals:
        raise ResourceLimitError(
            f"{len(spec.maps)}^{depth} = {count} intervals exceeds the cap {max_intervals}"
        )
    lo = np.array([spec.base[0]])
    hi = np.array([spec.base[1]])
    for _ in range(depth):
        kids = spec.children(lo, hi)
        # images are ordered, so interleaving children keeps the arrays sorted
        lo = np.stack([c[0] for c in kids], axis=1).ravel()
        hi = np.stack([c[1] for c in kids], axis=1).ravel()
    return IntervalApprox(depth, lo, hi, spec)


def flag(approx: IntervalApprox, lo: float, hi: float) -> int:
    """1 if the closed interval ``[lo, hi]`` meets the approximation, else 0."""
    if lo > hi:
        raise ValueError(f"malformed interval [{lo}, {hi}]")
    tol = approx.source.tolerance
    i = int(np.searchsorted(approx.rights, lo - tol, side="left"))
    return int(i < len(approx) and approx.lefts[i] <= hi + tol)


@dataclass(frozen=True)
class Location:
    """Where a point sits relative to an approximation.

    ``kind`` is one of ``"inside"``, ``"gap"``, ``"left"``, ``"right"``.  For
    ``"inside"`` the point lies in interval ``index``; for ``"gap"`` it lies
    strictly between intervals ``index`` and ``index + 1``.
    """

    kind: str
    index: int = -1


def locate(approx: IntervalApprox, t: float) -> Location:
    tol = approx.source.tolerance
    i = int(np.searchsorted(approx.lefts, t + tol, side="right")) - 1
    if i < 0:
        return Location("left")
    if t <= approx.rights[i] + tol:
        return Location("inside", i)
    if i == len(approx) - 1:
        return Location("right")
    return Location("gap", i)


def contains(spec: IfsSpec, x: float, depth: int, tol: float | None = None) -> bool:
    """Membership of ``x`` in the depth-``depth`` approximation, without building it."""
    tol = spec.tolerance if tol is None else tol
    lo, hi = spec.base
    if x < lo - tol or x > hi + tol:
        return False
    for _ in range(depth):
        for clo, chi in spec.children(lo, hi):
            if clo - tol <= x <= chi + tol:
                lo, hi = clo, chi
                break
        else:
            return False
    return True


def nearest_endpoint(spec: IfsSpec, t: float, depth: int) -> float:
    """Closest endpoint of a depth-``depth`` interval to ``t``.

    Endpoints of construction intervals are points of the attractor, so the
    result is always a genuine point of the set.
    """
    lo, hi = spec.base
    if t <= lo:
        return lo
    if t >= hi:
        return hi
    for _ in range(depth):
        if not spec.resolvable(lo, hi):
            break
        kids = spec.children(lo, hi)
        for i, (clo, chi) in enumerate(kids):
            if t < clo:
                prev = kids[i - 1][1] if i > 0 else lo
                return prev if t - prev <= clo - t else clo
            if t <= chi:
                lo, hi = clo, chi
                break
        else:
            chi = kids[-1][1]
            return chi if t - chi <= hi - t else hi
    return lo if t - lo <= hi - t else hi


def sample_points(
    spec: IfsSpec, n: int, rng: np.random.Generator, depth: int = 30
) -> np.ndarray:
    """``n`` random points of the set: left endpoints of random depth-``depth`` cells."""
    lo = np.full(n, spec.base[0])
    hi = np.full(n, spec.base[1])
    for _ in range(depth):
        digits = rng.integers(len(spec.maps), size=n)
        kids = spec.children(lo, hi)
        lo = np.choose(digits, [k[0] for k in kids])
        hi = np.choose(digits, [k[1] for k in kids])
    return lo
