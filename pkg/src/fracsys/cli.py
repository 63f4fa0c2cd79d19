"""Command-line front end.

Subcommands ``staircase``, ``mass``, ``dimension``, ``solve`` and ``verify``
read one JSON configuration (see :mod:`fracsys.config`) and write CSV tables
and SVG plots into ``--out``.

Exit status: 0 success, 1 invalid configuration or input, 2 numerical failure,
3 a verification check failed.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, NumericError, ResourceLimitError
from .fractal_set import sample_points
from .linsolve import (
    GeneralSolution,
    ModeBasis,
    abel_check,
    build_mode_basis,
    default_samples,
    dichotomy_scan,
    fit_initial_conditions,
    residual_check,
    spectral_residuals,
)
from .mass import Staircase, gamma_dimension, make_staircase, mass
from .output import PALETTE, write_csv, write_svg

log = logging.getLogger("fracsys")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

SPECTRAL_TOL = 1e-9
RESIDUAL_TOL = 1e-5
ABEL_RTOL = 1e-9
ROUNDTRIP_RTOL = 1e-10


class VerificationFailed(Exception):
    pass


def _staircase(cfg: RunConfig) -> Staircase:
    return make_staircase(cfg.fractal, cfg.alpha)


def _paths(cfg: RunConfig, out: Path, kind: str, default: str, tag: str | None = None) -> list[Path]:
    """Target files of one kind; ``tag`` keeps secondary reports apart from the main table."""
    if not cfg.outputs:
        return [out / default]
    paths = [out / name for name in cfg.outputs_of(kind)]
    return [_with_suffix(p, tag) for p in paths] if tag else paths


def _with_suffix(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def _need_matrix(cfg: RunConfig) -> np.ndarray:
    if cfg.matrix is None:
        raise ConfigError("matrix", "this command needs a system matrix")
    return cfg.matrix


def _basis(cfg: RunConfig, stair: Staircase) -> ModeBasis:
    A = _need_matrix(cfg)
    if cfg.modes is not None:
        return ModeBasis(cfg.modes, stair, cfg.t0)
    return build_mode_basis(A, stair, cfg.t0)


def _mass_rows(cfg: RunConfig) -> list[tuple]:
    a, b = cfg.t_range
    rows = []
    for alpha in cfg.alphas:
        est = mass(cfg.fractal, alpha, a, b)
        rows.append((alpha, est.value, est.depth_used, "true" if est.converged else "false"))
    return rows


# --- subcommands ---------------------------------------------------------------


def cmd_staircase(cfg: RunConfig, out: Path, seed: int) -> int:
    stair = _staircase(cfg)
    xs = np.linspace(cfg.t_range[0], cfg.t_range[1], cfg.samples)
    ss = stair.evaluate_many(xs)
    for p in _paths(cfg, out, "csv", "staircase.csv"):
        write_csv(p, ["x", "S"], zip(xs, ss))
        print(f"wrote {p}")
    for p in _paths(cfg, out, "svg", "staircase.svg"):
        write_svg(p, [(xs, ss, PALETTE[0], f"alpha = {stair.alpha:.6g}")], "integral staircase", "x", "S(x)")
        print(f"wrote {p}")
    return EXIT_OK


def cmd_mass(cfg: RunConfig, out: Path, seed: int) -> int:
    rows = _mass_rows(cfg)
    for alpha, value, depth, conv in rows:
        print(f"alpha={alpha:.6g} mass={value:.12g} depth={depth} converged={conv}")
    for p in _paths(cfg, out, "csv", "mass.csv", "mass"):
        write_csv(p, ["alpha", "mass", "depth", "converged"], rows)
        print(f"wrote {p}")
    return EXIT_OK


def cmd_dimension(cfg: RunConfig, out: Path, seed: int) -> int:
    a, b = cfg.t_range
    est = gamma_dimension(cfg.fractal, a, b)
    lo, hi = est.bracket
    print(f"dimension {est.alpha_hat:.10f} bracket [{lo:.10f}, {hi:.10f}] iterations {est.iterations}")
    for p in _paths(cfg, out, "csv", "dimension_mass.csv", "dimension_mass"):
        write_csv(p, ["alpha", "mass", "depth", "converged"], _mass_rows(cfg))
        print(f"wrote {p}")
    return EXIT_OK


def _constant_sets(cfg: RunConfig, basis: ModeBasis) -> list[tuple[str, np.ndarray]]:
    sets = [(f"c={list(map(float, c))}", c) for c in cfg.constants]
    if cfg.x0 is not None:
        sets.append((f"x0={list(map(float, cfg.x0))}", fit_initial_conditions(basis, cfg.t0, cfg.x0)))
    if not sets:
        sets = [(f"c=e{k + 1}", np.eye(basis.n)[k]) for k in range(basis.n)]
    return sets


def cmd_solve(cfg: RunConfig, out: Path, seed: int) -> int:
    stair = _staircase(cfg)
    basis = _basis(cfg, stair)
    n = basis.n
    ts = np.linspace(cfg.t_range[0], cfg.t_range[1], cfg.samples)
    ss = stair.evaluate_many(ts)
    sets = _constant_sets(cfg, basis)
    curves = []
    for label, c in sets:
        sol = GeneralSolution(basis, c)
        curves.append((label, np.array([sol.at_s(s) for s in ss])))
    header = ["t", "S"] + [f"x{j + 1}" for j in range(n)]
    for p in _paths(cfg, out, "csv", "solve.csv"):
        for k, (label, xs) in enumerate(curves):
            target = p if len(curves) == 1 else _with_suffix(p, f"c{k + 1}")
            write_csv(target, header, (np.concatenate([[t, s], x]) for t, s, x in zip(ts, ss, xs)))
            print(f"wrote {target} ({label})")
    for p in _paths(cfg, out, "svg", "solve.svg"):
        for j in range(n):
            series = [
                (ts, xs[:, j], PALETTE[k % len(PALETTE)], label) for k, (label, xs) in enumerate(curves)
            ]
            target = _with_suffix(p, f"x{j + 1}")
            write_svg(target, series, f"x{j + 1}(t)", "t", f"x{j + 1}")
            print(f"wrote {target}")
    return EXIT_OK


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def _run_check(name: str, threshold: float, fn: Callable[[], tuple[float, bool, str]]) -> CheckResult:
    try:
        value, ok, detail = fn()
    except (NumericError, ValueError) as exc:
        return CheckResult(name, math.nan, threshold, False, f"error: {exc}")
    return CheckResult(name, value, threshold, ok, detail)


def verify_config(cfg: RunConfig, seed: int = 0) -> list[CheckResult]:
    A = _need_matrix(cfg)
    stair = _staircase(cfg)
    rng = np.random.default_rng(seed)
    samples = np.unique(
        np.concatenate(
            [default_samples(stair, depth=cfg.depth, limit=16), sample_points(stair.spec, 4, rng)]
        )
    )
    samples = samples[(samples >= cfg.t_range[0]) & (samples <= cfg.t_range[1])]
    checks: list[CheckResult] = []
    try:
        basis = _basis(cfg, stair)
    except NumericError as exc:
        return [CheckResult("fundamental-set", math.nan, 0.0, False, f"error: {exc}")]

    def spectral():
        res = spectral_residuals(A, basis.modes)
        worst = max(res)
        return worst, worst <= SPECTRAL_TOL, f"{len(res)} modes"

    checks.append(_run_check("spectral-residual", SPECTRAL_TOL, spectral))

    sets = list(cfg.constants) or [np.ones(basis.n)]
    for k, c in enumerate(sets):
        def residual(c=c):
            rep = residual_check(GeneralSolution(basis, c), A, stair, samples)
            detail = f"{len(rep.samples)} samples"
            if rep.failures:
                detail += f", {len(rep.failures)} derivative failures (first at t={rep.failures[0][0]!r})"
            return rep.sup_norm, rep.passed(RESIDUAL_TOL), detail

        checks.append(_run_check(f"system-residual[c{k + 1}]", RESIDUAL_TOL, residual))

    def abel():
        trace = float(np.trace(A))
        worst = max(abel_check(trace, basis, cfg.t0, float(t)).rel_residual for t in samples)
        return worst, worst <= ABEL_RTOL, f"trace {trace:.6g}"

    checks.append(_run_check("abel", ABEL_RTOL, abel))

    def dichotomy():
        v = dichotomy_scan(basis, samples)
        return v.min_abs, v.verdict == "never-zero", v.verdict

    checks.append(_run_check("dichotomy", 0.0, dichotomy))

    def roundtrip():
        x0 = cfg.x0 if cfg.x0 is not None else np.arange(1.0, basis.n + 1.0)
        c = fit_initial_conditions(basis, cfg.t0, x0)
        err = float(np.linalg.norm(GeneralSolution(basis, c)(cfg.t0) - x0))
        bound = ROUNDTRIP_RTOL * (1.0 + np.linalg.norm(x0))
        return err, err <= bound, ""

    checks.append(_run_check("initial-condition-roundtrip", ROUNDTRIP_RTOL, roundtrip))
    return checks


def cmd_verify(cfg: RunConfig, out: Path, seed: int) -> int:
    checks = verify_config(cfg, seed)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.value:.3e} (threshold {c.threshold:.1e}) {c.detail}".rstrip())
    for p in _paths(cfg, out, "csv", "verify.csv", "verify"):
        write_csv(
            p,
            ["check", "value", "threshold", "passed", "detail"],
            [(c.name, c.value, c.threshold, "true" if c.passed else "false", c.detail) for c in checks],
        )
        print(f"wrote {p}")
    if all(c.passed for c in checks):
        return EXIT_OK
    raise VerificationFailed(", ".join(c.name for c in checks if not c.passed))


COMMANDS = {
    "staircase": cmd_staircase,
    "mass": cmd_mass,
    "dimension": cmd_dimension,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsys", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " workflow")
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--out", default=".", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--depth", type=int, default=None, help="override the configured depth")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.depth)
        return COMMANDS[args.command](cfg, Path(args.out), args.seed)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, ResourceLimitError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
