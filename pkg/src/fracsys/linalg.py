"""Dense linear-algebra kernels for small constant-coefficient systems.

Characteristic polynomials come from the Faddeev-LeVerrier recurrence, their
roots from Durand-Kerner iteration, and null spaces / chain vectors from
Gauss-Jordan elimination with partial pivoting.  Elimination scans columns from
last to first, so the leading coordinates end up as free parameters: free
parameters set to 1 (null space) or 0 (chain equations) reproduce the vectors one
gets by hand, e.g. ``(1, 2)`` rather than ``(1/2, 1)``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DefectStructureError, NumericError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 12
MAX_SWEEPS = 500
CLUSTER_RTOL = 1e-7
PIVOT_RTOL = 1e-9
EPS = np.finfo(float).eps


def characteristic_polynomial(A) -> list[float]:
    """Monic coefficients (highest degree first) of ``det(r I - A)``.

    The roots coincide with those of ``det(A - r I)``, which differs by ``(-1)**n``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > MAX_DIMENSION:
        raise ValueError(f"dimension {n} exceeds the cap {MAX_DIMENSION}")
    coeffs = [1.0]
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * eye
        coeffs.append(-float(np.trace(A @ M)) / k)
    return coeffs


def polyval(coeffs, z):
    acc = 0.0
    for c in coeffs:
        acc = acc * z + c
    return acc


def _rounding_bound(coeffs, z) -> float:
    az = abs(z)
    acc = 0.0
    for c in coeffs:
        acc = acc * az + abs(c)
    return acc * EPS


def durand_kerner(coeffs, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """All complex roots of a monic polynomial by simultaneous (Weierstrass) iteration."""
    coeffs = [complex(c) for c in coeffs]
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("polynomial must have degree at least 1")
    if coeffs[0] != 1.0:
        raise ValueError("polynomial must be monic")
    if n == 1:
        return np.array([-coeffs[1]])
    center = -coeffs[1] / n
    radius = 1.0 + max(abs(c) for c in coeffs[1:])
    z = np.array([center + radius * cmath.exp(1j * (2 * math.pi * k / n + 0.4)) for k in range(n)])
    for sweep in range(max_sweeps):
        biggest = 0.0
        for i in range(n):
            denom = 1.0 + 0j
            for j in range(n):
                if j != i:
                    d = z[i] - z[j]
                    denom *= d if d != 0 else 1e-300
            step = polyval(coeffs, z[i]) / denom
            z[i] -= step
            biggest = max(biggest, abs(step) / (1.0 + abs(z[i])))
        small = all(abs(polyval(coeffs, zi)) <= _rounding_bound(coeffs, zi) for zi in z)
        if small or biggest <= 4 * EPS:
            return z
    raise NumericError(
        f"Durand-Kerner iteration did not converge in {max_sweeps} sweeps",
        {"roots": z.tolist(), "residuals": [abs(polyval(coeffs, zi)) for zi in z]},
    )


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue clusters ``(value, multiplicity)`` plus the polynomial they solve."""

    roots: tuple[tuple[complex, int], ...]
    char_coeffs: tuple[float, ...]
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def values(self) -> list[complex]:
        return [r for r, m in self.roots for _ in range(m)]

    def multiplicity(self, r: complex, tol: float | None = None) -> int:
        scale = 1.0 + max(abs(v) for v, _ in self.roots)
        tol = CLUSTER_RTOL * scale if tol is None else tol
        return sum(m for v, m in self.roots if abs(v - r) <= 10 * tol)


def _components(z: list[complex], reach: float) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for i in range(len(z)):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            j = stack.pop()
            comp.append(j)
            for k in range(len(z)):
                if k not in seen and abs(z[j] - z[k]) <= reach:
                    seen.add(k)
                    stack.append(k)
        comps.append(comp)
    return comps


def _cluster(z: np.ndarray, scale: float) -> list[list[complex]]:
    """Group raw roots that are rounding images of one multiple root.

    A ``k``-fold root is smeared by rounding to a ring of radius about
    ``(eps * size)**(1/k)``, so the merge distance depends on the group size.
    Sizes are tried from largest to smallest.
    """
    n = len(z)
    tol = CLUSTER_RTOL * scale
    rest = [complex(v) for v in z]
    groups: list[list[complex]] = []
    for k in range(n, 1, -1):
        reach = max(tol, 2.0 * (64 * n * EPS) ** (1.0 / k) * scale)
        keep = []
        for comp in _components(rest, reach):
            if len(comp) >= k:
                groups.append([rest[i] for i in comp])
            else:
                keep.extend(rest[i] for i in comp)
        rest = keep
    return groups + [[v] for v in rest]


def _polish(coeffs: list[float], c: complex, m: int) -> complex:
    """Newton on the ``(m-1)``-th derivative, where an ``m``-fold root is simple."""
    d = np.array(coeffs, dtype=complex)
    for _ in range(m - 1):
        d = np.polyder(d)
    dd = np.polyder(d)
    for _ in range(8):
        den = polyval(dd, c)
        if den == 0:
            break
        step = polyval(d, c) / den
        if not np.isfinite(step) or abs(step) > 1e-3 * (1.0 + abs(c)):
            break
        c -= step
        if abs(step) <= 4 * EPS * (1.0 + abs(c)):
            break
    return c


def _symmetrize(centers: list[tuple[complex, int]], tol: float) -> list[tuple[complex, int]]:
    out = [(complex(c.real, 0.0), m) for c, m in centers if abs(c.imag) <= tol]
    upper = [(c, m) for c, m in centers if c.imag > tol]
    lower = [(c, m) for c, m in centers if c.imag < -tol]
    if len(upper) != len(lower):
        raise NumericError("complex roots do not come in conjugate pairs", {"roots": centers})
    for u, m in upper:
        k = min(range(len(lower)), key=lambda i: abs(lower[i][0] - u.conjugate()))
        v, mv = lower.pop(k)
        if mv != m:
            raise NumericError("conjugate roots have different multiplicities", {"roots": centers})
        re, im = 0.5 * (u.real + v.real), 0.5 * (u.imag - v.imag)
        out += [(complex(re, im), m), (complex(re, -im), m)]
    return out


def eigenvalues(coeffs) -> Spectrum:
    """Roots of the characteristic polynomial grouped by multiplicity."""
    coeffs = [float(c) for c in coeffs]
    z = durand_kerner(coeffs)
    scale = 1.0 + float(np.max(np.abs(z)))
    tol = CLUSTER_RTOL * scale
    groups = _cluster(z, scale)
    centers = [(_polish(coeffs, sum(g) / len(g), len(g)) if len(g) > 1 else g[0], len(g)) for g in groups]
    roots = _symmetrize(centers, tol)
    roots.sort(key=lambda rm: (-rm[0].real, -rm[0].imag))
    notes = []
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i][0] - roots[j][0]) <= 10 * tol:
                notes.append(f"eigenvalues {roots[i][0]:.12g} and {roots[j][0]:.12g} are nearly multiple")
    for note in notes:
        logger.warning(note)
    return Spectrum(tuple(roots), tuple(coeffs), tuple(notes))


def _reduce(M: np.ndarray, rhs: np.ndarray | None, threshold: float):
    """Gauss-Jordan elimination scanning columns right to left.

    Returns the reduced matrix, the transformed right-hand side and the list of
    ``(row, column)`` pivots.
    """
    R = np.array(M, dtype=complex)
    b = None if rhs is None else np.array(rhs, dtype=complex)
    rows, cols = R.shape
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in reversed(range(cols)):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(R[r:, col])))
        if abs(R[p, col]) <= threshold:
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
            if b is not None:
                b[[r, p]] = b[[p, r]]
        piv = R[r, col]
        R[r] /= piv
        if b is not None:
            b[r] /= piv
        for i in range(rows):
            if i != r and R[i, col] != 0:
                factor = R[i, col]
                R[i] -= factor * R[r]
                if b is not None:
                    b[i] -= factor * b[r]
        pivots.append((r, col))
        r += 1
    return R, b, pivots


def _maybe_real(v: np.ndarray) -> np.ndarray:
    return v.real.copy() if np.all(v.imag == 0) else v


def normalize_leading(v: np.ndarray) -> np.ndarray:
    """Scale so the first non-negligible component equals 1."""
    big = np.max(np.abs(v))
    k = int(np.flatnonzero(np.abs(v) > 1e-12 * big)[0])
    return v / v[k] + 0.0


def nullspace(M, threshold: float | None = None) -> list[np.ndarray]:
    M = np.asarray(M)
    if threshold is None:
        threshold = PIVOT_RTOL * np.max(np.sum(np.abs(M), axis=1))
    R, _, pivots = _reduce(M, None, threshold)
    pivot_cols = {c for _, c in pivots}
    basis = []
    for f in range(M.shape[1]):
        if f in pivot_cols:
            continue
        v = np.zeros(M.shape[1], dtype=complex)
        v[f] = 1.0
        for row, col in pivots:
            v[col] = -R[row, f]
        basis.append(_maybe_real(normalize_leading(v)))
    return basis


def shifted(A, r: complex) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return A - r * np.eye(A.shape[0])


def eigenvectors(A, r: complex) -> list[np.ndarray]:
    """Basis of the null space of ``A - r I``."""
    M = shifted(A, r)
    basis = nullspace(M)
    if not basis:
        # badly scaled columns can hide a tiny pivot from partial pivoting
        v = _inverse_iteration(np.asarray(A, dtype=float), r)
        if v is None:
            raise NumericError(
                f"A - rI is nonsingular at claimed eigenvalue r={r}", {"r": r}
            )
        basis = [v]
    return basis


def _inverse_iteration(A: np.ndarray, r: complex, steps: int = 3) -> np.ndarray | None:
    n = A.shape[0]
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    shift = r + (1.0 + norm) * 64 * EPS
    M = A - shift * np.eye(n)
    v = np.ones(n, dtype=complex) / math.sqrt(n)
    try:
        for _ in range(steps):
            v = np.linalg.solve(M, v)
            v /= np.linalg.norm(v)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(v)):
        return None
    v = normalize_leading(v)
    if np.max(np.abs(A @ v - r * v)) > PIVOT_RTOL * (1.0 + norm) * np.max(np.abs(v)):
        return None
    if complex(r).imag == 0.0:
        v = v.real.copy() + 0.0
    return v


def solve_singular(M, rhs, threshold: float | None = None) -> np.ndarray:
    """One solution of a possibly rank-deficient ``M x = rhs`` (free parameters 0)."""
    M = np.asarray(M)
    rhs = np.asarray(rhs)
    norm = np.max(np.sum(np.abs(M), axis=1))
    if threshold is None:
        threshold = PIVOT_RTOL * norm
    R, b, pivots = _reduce(M, rhs, threshold)
    used = {row for row, _ in pivots}
    slack = PIVOT_RTOL * (1.0 + norm) * (1.0 + np.max(np.abs(rhs)))
    for row in range(M.shape[0]):
        if row not in used and abs(b[row]) > slack:
            raise DefectStructureError(
                "right-hand side is not in the range of the matrix",
                {"row": row, "residual": abs(b[row])},
            )
    x = np.zeros(M.shape[1], dtype=complex)
    for row, col in pivots:
        x[col] = b[row]
    return x


def jordan_chain(A, r: complex, xi) -> np.ndarray:
    """Generalized eigenvector ``eta`` with ``(A - r I) eta = xi``.

    Free parameters are fixed to zero, which removes the arbitrary multiple of
    ``xi`` a hand solution would carry.
    """
    A = np.asarray(A, dtype=float)
    M = shifted(A, r)
    xi = np.asarray(xi)
    norm = np.max(np.sum(np.abs(M), axis=1))
    if np.max(np.abs(M @ xi)) > PIVOT_RTOL * (1.0 + norm) * np.max(np.abs(xi)):
        raise ValueError("xi is not an eigenvector for r")
    geometric = len(nullspace(M))
    algebraic = eigenvalues(characteristic_polynomial(A)).multiplicity(r)
    if geometric >= algebraic:
        raise DefectStructureError(
            f"eigenvalue {r} has a full eigenspace ({geometric} of {algebraic}); no chain needed",
            {"geometric": geometric, "algebraic": algebraic},
        )
    eta = solve_singular(M, xi)
    residual = np.max(np.abs(M @ eta - xi))
    if residual > PIVOT_RTOL * (1.0 + norm * np.max(np.abs(eta))):
        raise DefectStructureError("chain equation residual too large", {"residual": residual})
    return _maybe_real(eta)
