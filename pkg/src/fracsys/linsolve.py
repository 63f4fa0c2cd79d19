"""Constant-coefficient systems ``D x(t) = A x(t)`` on a fractal time set.

Every solution depends on ``t`` only through the staircase value ``s = S(t)``,
and in that coordinate the system is the classical ``dx/ds = A x``.  Solutions
are therefore assembled from eigen-data exactly as for ordinary linear ODEs:
real eigenpairs give ``xi * exp(r s)``, conjugate pairs give the real and
imaginary parts of ``xi * exp(r s)``, and defective eigenvalues give Jordan
chains with polynomial factors in ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .calculus import f_alpha_derivative, f_alpha_integral
from .errors import FundamentalSetError, NumericError
from .fractal_set import build_approximation
from .linalg import (
    PIVOT_RTOL,
    Spectrum,
    characteristic_polynomial,
    eigenvalues,
    eigenvectors,
    nullspace,
    shifted,
    solve_singular,
)
from .mass import Staircase

WRONSKIAN_RTOL = 1e-10
DICHOTOMY_RTOL = 1e-12
FIT_RTOL = 1e-10
SPECTRAL_RTOL = 1e-9


@dataclass(frozen=True)
class SystemSpec:
    """``D x = A x`` on the set carried by ``staircase``, started at ``t0``."""

    A: np.ndarray
    staircase: Staircase
    t0: float
    x0: np.ndarray | None = None

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValueError(f"A must be a nonempty square matrix, got shape {A.shape}")
        lo, hi = self.staircase.spec.base
        if not lo <= self.t0 <= hi:
            raise ValueError(f"t0={self.t0} lies outside [{lo}, {hi}]")
        object.__setattr__(self, "A", A)
        if self.x0 is not None:
            x0 = np.array(self.x0, dtype=float)
            if x0.shape != (A.shape[0],):
                raise ValueError(f"x0 must have length {A.shape[0]}")
            object.__setattr__(self, "x0", x0)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def alpha(self) -> float:
        return self.staircase.alpha


# --- modes -----------------------------------------------------------------


@dataclass(frozen=True)
class RealMode:
    r: float
    xi: np.ndarray

    count = 1

    def columns(self, s: float) -> list[np.ndarray]:
        return [self.xi * math.exp(self.r * s)]

    def spectral_residual(self, A: np.ndarray) -> float:
        return float(np.max(np.abs(A @ self.xi - self.r * self.xi)))

    def scale(self) -> float:
        return float(np.max(np.abs(self.xi)))


@dataclass(frozen=True)
class ComplexPairMode:
    """Real and imaginary parts of ``(u0 + i v0) exp((a + i b) s)``."""

    a: float
    b: float
    u0: np.ndarray
    v0: np.ndarray

    count = 2

    def __post_init__(self) -> None:
        if not self.b > 0:
            raise ValueError(f"imaginary part b must be positive, got {self.b}")

    def columns(self, s: float) -> list[np.ndarray]:
        g = math.exp(self.a * s)
        c, sn = math.cos(self.b * s), math.sin(self.b * s)
        return [g * (self.u0 * c - self.v0 * sn), g * (self.u0 * sn + self.v0 * c)]

    def spectral_residual(self, A: np.ndarray) -> float:
        xi = self.u0 + 1j * self.v0
        return float(np.max(np.abs(A @ xi - complex(self.a, self.b) * xi)))

    def scale(self) -> float:
        return float(np.max(np.abs(self.u0 + 1j * self.v0)))


@dataclass(frozen=True)
class ChainMode:
    """Jordan chain ``xi0, ..., xi_m`` with ``(A - rI) xi_j = xi_{j-1}``.

    Solution ``i`` is ``sum_{j<=i} xi_j s**(i-j) / (i-j)! * exp(r s)``.  A
    complex ``r`` (upper half plane) stands for the chain and its conjugate and
    contributes the real and imaginary part of each solution.
    """

    r: complex
    chain: tuple[np.ndarray, ...]

    @property
    def is_complex(self) -> bool:
        return complex(self.r).imag != 0.0

    @property
    def count(self) -> int:
        return len(self.chain) * (2 if self.is_complex else 1)

    def columns(self, s: float) -> list[np.ndarray]:
        if self.is_complex:
            g = np.exp(complex(self.r) * s)
        else:
            g = math.exp(float(np.real(self.r)) * s)
        out = []
        for i in range(len(self.chain)):
            x = sum(self.chain[j] * (s ** (i - j) / math.factorial(i - j)) for j in range(i + 1)) * g
            if self.is_complex:
                out += [x.real, x.imag]
            else:
                out.append(np.real(x))
        return out

    def spectral_residual(self, A: np.ndarray) -> float:
        M = A - complex(self.r) * np.eye(A.shape[0])
        worst = float(np.max(np.abs(M @ self.chain[0])))
        for prev, cur in zip(self.chain, self.chain[1:]):
            worst = max(worst, float(np.max(np.abs(M @ cur - prev))))
        return worst

    def scale(self) -> float:
        return max(float(np.max(np.abs(v))) for v in self.chain)


Mode = Union[RealMode, ComplexPairMode, ChainMode]


def spectral_residuals(A, modes: Sequence[Mode]) -> list[float]:
    """Relative eigen-equation residual of each mode."""
    A = np.asarray(A, dtype=float)
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    return [m.spectral_residual(A) / ((1.0 + norm) * m.scale()) for m in modes]


# --- fundamental matrices ---------------------------------------------------


@dataclass(frozen=True)
class ModeBasis:
    """``n`` real solutions stacked as the columns of ``X(t)``.

    With ``mix`` set the columns are ``X_modes(t) @ mix``, which covers
    re-normalised bases such as the one with ``X(t0) = I``.
    """

    modes: tuple[Mode, ...]
    staircase: Staircase
    t0: float
    mix: np.ndarray | None = None
    validate: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        n = len(self.modes[0].columns(0.0)[0]) if self.modes else 0
        if n == 0 or sum(m.count for m in self.modes) != n:
            raise ValueError(
                f"modes supply {sum(m.count for m in self.modes)} solutions for a system of size {n}"
            )
        if self.mix is not None:
            mix = np.array(self.mix, dtype=float)
            if mix.shape != (n, n):
                raise ValueError(f"mix must be {n}x{n}")
            object.__setattr__(self, "mix", mix)
        if self.validate:
            X = self.fundamental_matrix(self.t0)
            w = float(np.linalg.det(X))
            scale = float(np.prod(np.linalg.norm(X, axis=0)))
            if not abs(w) > WRONSKIAN_RTOL * scale:
                raise FundamentalSetError(
                    f"Wronskian {w:.3e} at t0={self.t0} is negligible against {scale:.3e}",
                    {"wronskian": w, "scale": scale, "t0": self.t0},
                )

    @property
    def n(self) -> int:
        return sum(m.count for m in self.modes)

    def at_s(self, s: float) -> np.ndarray:
        X = np.column_stack([c for m in self.modes for c in m.columns(s)])
        return X if self.mix is None else X @ self.mix

    def fundamental_matrix(self, t: float) -> np.ndarray:
        return self.at_s(self.staircase(t))

    def normalized_at(self, t0: float | None = None) -> ModeBasis:
        """Same solution space, recombined so that ``X(t0) = I``."""
        t0 = self.t0 if t0 is None else t0
        X0 = self.fundamental_matrix(t0)
        try:
            inv = np.linalg.inv(X0)
        except np.linalg.LinAlgError as exc:
            raise FundamentalSetError(f"X(t0) is singular at t0={t0}") from exc
        mix = inv if self.mix is None else self.mix @ inv
        return ModeBasis(self.modes, self.staircase, t0, mix, self.validate)


def _real_vec(v: np.ndarray) -> np.ndarray:
    return np.real(v).astype(float) + 0.0


def _rank(vectors: list[np.ndarray], tol: float) -> int:
    if not vectors:
        return 0
    return int(np.linalg.matrix_rank(np.column_stack(vectors), tol=tol))


def _chain_bottom_up(A: np.ndarray, r: complex, xi: np.ndarray, length: int) -> tuple[np.ndarray, ...]:
    chain = [xi]
    M = shifted(A, r)
    while len(chain) < length:
        chain.append(solve_singular(M, chain[-1]))
    return tuple(chain)


def _chains_top_down(A: np.ndarray, r: complex, m: int) -> list[tuple[np.ndarray, ...]]:
    """Jordan chains for ``r`` from the kernels of ``(A - rI)**j``."""
    N = shifted(A, r).astype(complex)
    kernels: list[list[np.ndarray]] = [[]]
    P = np.eye(N.shape[0], dtype=complex)
    while len(kernels[-1]) < m:
        if len(kernels) > m:
            raise NumericError(f"kernel filtration for r={r} did not reach dimension {m}")
        P = P @ N
        kernels.append(nullspace(P))
    tol = 1e3 * PIVOT_RTOL
    chains: list[tuple[np.ndarray, ...]] = []
    for level in range(len(kernels) - 1, 0, -1):
        existing = list(kernels[level - 1]) + [c[level - 1] for c in chains if len(c) >= level]
        for v in kernels[level]:
            if _rank(existing + [v], tol) > _rank(existing, tol):
                existing.append(v)
                seq = [v]
                for _ in range(level - 1):
                    seq.append(N @ seq[-1])
                chains.append(tuple(reversed(seq)))
    return chains


def modes_for_root(A: np.ndarray, r: complex, m: int) -> list[Mode]:
    """Real solution modes spanning the generalised eigenspace of ``r``.

    For a complex ``r`` (upper half plane) the modes also cover its conjugate.
    """
    vecs = eigenvectors(A, r)
    g = len(vecs)
    if g > m:
        raise NumericError(f"geometric multiplicity {g} exceeds algebraic {m} at r={r}")
    complex_root = complex(r).imag != 0.0
    if g == m:
        if complex_root:
            return [ComplexPairMode(r.real, r.imag, _real_vec(v), _real_vec(-1j * v)) for v in vecs]
        return [RealMode(float(np.real(r)), _real_vec(v)) for v in vecs]
    if g == 1:
        chains = [_chain_bottom_up(A, r, vecs[0], m)]
    else:
        chains = _chains_top_down(A, r, m)
    if complex_root:
        return [ChainMode(complex(r), tuple(np.asarray(v, dtype=complex) for v in c)) for c in chains]
    return [ChainMode(float(np.real(r)), tuple(_real_vec(v) for v in c)) for c in chains]


def build_mode_basis(
    A, staircase: Staircase, t0: float | None = None, spectrum: Spectrum | None = None
) -> ModeBasis:
    """Fundamental set of real solutions for ``D x = A x``."""
    A = np.asarray(A, dtype=float)
    if spectrum is None:
        spectrum = eigenvalues(characteristic_polynomial(A))
    modes: list[Mode] = []
    for r, m in spectrum.roots:
        if r.imag < 0:
            continue
        modes.extend(modes_for_root(A, r if r.imag > 0 else complex(r.real, 0.0), m))
    t0 = staircase.spec.base[0] if t0 is None else t0
    return ModeBasis(tuple(modes), staircase, t0)


# --- solutions ---------------------------------------------------------------


@dataclass(frozen=True)
class GeneralSolution:
    basis: ModeBasis
    c: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.c, dtype=float)
        if c.shape != (self.basis.n,):
            raise ValueError(f"need {self.basis.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "c", c)

    def at_s(self, s: float) -> np.ndarray:
        return self.basis.at_s(s) @ self.c

    def __call__(self, t: float) -> np.ndarray:
        return self.at_s(self.basis.staircase(t))


def evaluate(solution: GeneralSolution, t: float) -> np.ndarray:
    return solution(t)


def fit_initial_conditions(basis: ModeBasis, t0: float, x0) -> np.ndarray:
    """Coefficients ``c`` with ``X(t0) c = x0``."""
    x0 = np.asarray(x0, dtype=float)
    X0 = basis.fundamental_matrix(t0)
    try:
        c = np.linalg.solve(X0, x0)
    except np.linalg.LinAlgError as exc:
        raise FundamentalSetError(f"X(t0) is singular at t0={t0}", {"t0": t0}) from exc
    residual = float(np.linalg.norm(X0 @ c - x0))
    if residual > FIT_RTOL * (1.0 + np.linalg.norm(x0) + np.linalg.norm(X0) * np.linalg.norm(c)):
        raise FundamentalSetError(
            f"initial-condition fit residual {residual:.3e} too large", {"residual": residual}
        )
    return c


def wronskian(basis: ModeBasis, t: float) -> float:
    return float(np.linalg.det(basis.fundamental_matrix(t)))


# --- verification -----------------------------------------------------------


@dataclass(frozen=True)
class AbelReport:
    w0: float
    w1: float
    predicted: float
    abs_residual: float
    rel_residual: float

    def passed(self, rtol: float = 1e-9) -> bool:
        return self.rel_residual <= rtol


def abel_check(
    trace: float | Callable[[float], float],
    basis: ModeBasis,
    t0: float,
    t1: float,
    staircase: Staircase | None = None,
    depth: int = 12,
) -> AbelReport:
    """Compare ``W(t1)`` with ``W(t0) * exp(integral of the trace from t0 to t1)``."""
    stair = basis.staircase if staircase is None else staircase
    w0, w1 = wronskian(basis, t0), wronskian(basis, t1)
    if t0 == t1:
        exponent = 0.0
    elif callable(trace):
        lo, hi = min(t0, t1), max(t0, t1)
        exponent = f_alpha_integral(trace, stair, lo, hi, depth).value
        exponent = exponent if t1 > t0 else -exponent
    else:
        exponent = float(trace) * (stair(t1) - stair(t0))
    predicted = w0 * math.exp(exponent)
    err = abs(w1 - predicted)
    return AbelReport(w0, w1, predicted, err, err / max(abs(predicted), abs(w1), 1e-300))


@dataclass(frozen=True)
class DichotomyVerdict:
    verdict: str
    min_abs: float
    max_abs: float
    scale: float


def dichotomy_scan(basis: ModeBasis, t_samples) -> DichotomyVerdict:
    """Classify the Wronskian on the samples as never-zero or identically zero."""
    ts = [float(t) for t in t_samples]
    if len(ts) < 2:
        raise ValueError("need at least two sample points")
    ws, scale = [], 0.0
    for t in ts:
        X = basis.fundamental_matrix(t)
        ws.append(abs(float(np.linalg.det(X))))
        scale = max(scale, float(np.prod(np.linalg.norm(X, axis=0))))
    lo, hi = min(ws), max(ws)
    if hi <= DICHOTOMY_RTOL * scale:
        verdict = "identically-zero"
    elif hi > 0 and lo > DICHOTOMY_RTOL * hi:
        verdict = "never-zero"
    else:
        verdict = "violation"
    return DichotomyVerdict(verdict, lo, hi, scale)


def default_samples(stair: Staircase, depth: int = 10, limit: int | None = None) -> np.ndarray:
    """Endpoints of the depth-``depth`` construction intervals, optionally thinned."""
    approx = build_approximation(stair.spec, depth)
    pts = approx.endpoints()
    if limit is not None and len(pts) > limit:
        idx = np.unique(np.linspace(0, len(pts) - 1, limit).round().astype(int))
        pts = pts[idx]
    return pts


@dataclass(frozen=True)
class ResidualReport:
    sup_norm: float
    per_sample: tuple[float, ...]
    samples: tuple[float, ...]
    failures: tuple[tuple[float, str], ...] = ()

    def passed(self, tol: float = 1e-5) -> bool:
        return not self.failures and self.sup_norm <= tol


def residual_check(
    solution: GeneralSolution | Callable[[float], np.ndarray],
    A,
    staircase: Staircase,
    t_samples=None,
    **deriv_kwargs,
) -> ResidualReport:
    """``max_t |D x(t) - A x(t)|_inf`` with a numerical F^alpha-derivative."""
    A = np.asarray(A, dtype=float)
    ts = default_samples(staircase, limit=32) if t_samples is None else t_samples
    per, used, failures = [], [], []
    for t in ts:
        t = float(t)
        x = np.asarray(solution(t), dtype=float)
        try:
            dx = np.array(
                [
                    f_alpha_derivative(lambda u, k=k: float(solution(u)[k]), staircase, t, **deriv_kwargs).value
                    for k in range(len(x))
                ]
            )
        except NumericError as exc:
            failures.append((t, str(exc)))
            continue
        per.append(float(np.max(np.abs(dx - A @ x))))
        used.append(t)
    sup = max(per) if per else math.inf
    return ResidualReport(sup, tuple(per), tuple(used), tuple(failures))
