"""Run configuration: one JSON file fully determines a CLI run.

Example::

    {
      "fractal": {"kind": "cantor", "ratio": 0.3333333333333333},
      "alpha": "auto",
      "matrix": [[1, 1], [4, 1]],
      "t_range": [0, 1],
      "t0": 0,
      "constants": [[1, 0], [0, 1]],
      "samples": 400,
      "outputs": [{"kind": "csv", "path": "solve.csv"}, {"kind": "svg", "path": "solve.svg"}]
    }

``fractal`` is either ``{"kind": "cantor", "ratio": r}``, ``{"kind": "interval"}``
or an explicit ``{"base": [a, b], "maps": [[ratio, offset], ...]}``; an optional
``base`` applies to the first two forms as well.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .fractal_set import IfsSpec
from .linsolve import ChainMode, ComplexPairMode, Mode, RealMode

OUTPUT_KINDS = ("csv", "svg")


@dataclass(frozen=True)
class OutputSpec:
    kind: str
    path: str


@dataclass(frozen=True)
class RunConfig:
    fractal: IfsSpec
    alpha: float | None  # None means the similarity dimension
    matrix: np.ndarray | None
    t_range: tuple[float, float]
    t0: float
    x0: np.ndarray | None
    constants: tuple[np.ndarray, ...]
    samples: int
    depth: int
    alphas: tuple[float, ...]
    outputs: tuple[OutputSpec, ...]
    modes: tuple[Mode, ...] | None = None

    @property
    def n(self) -> int:
        return 0 if self.matrix is None else self.matrix.shape[0]

    def outputs_of(self, kind: str) -> list[str]:
        return [o.path for o in self.outputs if o.kind == kind]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _vector(value: Any, path: str, n: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a nonempty list of numbers")
    vec = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])
    if n is not None and len(vec) != n:
        raise ConfigError(path, f"expected length {n}, got {len(vec)}")
    return vec


def _pair(value: Any, path: str) -> tuple[float, float]:
    vec = _vector(value, path, 2)
    if not vec[0] < vec[1]:
        raise ConfigError(path, f"need an increasing pair, got {value!r}")
    return float(vec[0]), float(vec[1])


def _fractal(raw: Any) -> IfsSpec:
    path = "fractal"
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    base = _pair(raw["base"], f"{path}.base") if "base" in raw else (0.0, 1.0)
    kind = raw.get("kind", "ifs")
    try:
        if kind == "cantor":
            return IfsSpec.cantor(_number(raw.get("ratio", 1.0 / 3.0), f"{path}.ratio"), base)
        if kind == "interval":
            return IfsSpec.interval(base)
        if kind == "ifs":
            maps = raw.get("maps")
            if not isinstance(maps, list):
                raise ConfigError(f"{path}.maps", "expected a list of [ratio, offset] pairs")
            pairs = [tuple(_vector(m, f"{path}.maps[{i}]", 2)) for i, m in enumerate(maps)]
            return IfsSpec(base, tuple(pairs))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown fractal kind {kind!r}")


def _matrix(raw: Any) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("matrix", "expected a nonempty list of rows")
    rows = [_vector(row, f"matrix[{i}]") for i, row in enumerate(raw)]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ConfigError(f"matrix[{i}]", f"expected {n} entries (square matrix), got {len(row)}")
    return np.array(rows)


def _modes(raw: Any, n: int) -> tuple[Mode, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("modes", "expected a nonempty list of mode objects")
    out: list[Mode] = []
    for i, m in enumerate(raw):
        path = f"modes[{i}]"
        if not isinstance(m, dict):
            raise ConfigError(path, "expected an object")
        kind = m.get("kind")
        if kind == "real":
            out.append(RealMode(_number(m.get("r"), f"{path}.r"), _vector(m.get("xi"), f"{path}.xi", n)))
        elif kind == "complex":
            b = _number(m.get("b"), f"{path}.b")
            if not b > 0:
                raise ConfigError(f"{path}.b", "must be positive")
            out.append(
                ComplexPairMode(
                    _number(m.get("a"), f"{path}.a"),
                    b,
                    _vector(m.get("u0"), f"{path}.u0", n),
                    _vector(m.get("v0"), f"{path}.v0", n),
                )
            )
        elif kind == "chain":
            chain = m.get("chain")
            if not isinstance(chain, list) or not chain:
                raise ConfigError(f"{path}.chain", "expected a nonempty list of vectors")
            vecs = tuple(_vector(v, f"{path}.chain[{j}]", n) for j, v in enumerate(chain))
            out.append(ChainMode(_number(m.get("r"), f"{path}.r"), vecs))
        else:
            raise ConfigError(f"{path}.kind", f"expected 'real', 'complex' or 'chain', got {kind!r}")
    if sum(m.count for m in out) != n:
        raise ConfigError("modes", f"modes give {sum(m.count for m in out)} solutions, need {n}")
    return tuple(out)


def parse_config(raw: Any, depth_override: int | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {
        "fractal", "alpha", "matrix", "t_range", "t0", "x0", "constants",
        "samples", "depth", "alphas", "outputs", "modes", "description",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")
    if "fractal" not in raw:
        raise ConfigError("fractal", "missing required field")
    fractal = _fractal(raw["fractal"])

    alpha_raw = raw.get("alpha", "auto")
    if alpha_raw == "auto":
        alpha = None
    else:
        alpha = _number(alpha_raw, "alpha")
        if not 0.0 < alpha <= 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1], got {alpha}")

    matrix = _matrix(raw["matrix"]) if "matrix" in raw else None
    n = 0 if matrix is None else matrix.shape[0]

    t_range = _pair(raw["t_range"], "t_range") if "t_range" in raw else fractal.base
    lo, hi = fractal.base
    if t_range[0] < lo or t_range[1] > hi:
        raise ConfigError("t_range", f"must lie within the base interval [{lo}, {hi}]")
    t0 = _number(raw.get("t0", t_range[0]), "t0")
    if not t_range[0] <= t0 <= t_range[1]:
        raise ConfigError("t0", f"{t0} is outside t_range {list(t_range)}")

    def need_matrix(key: str) -> None:
        if matrix is None:
            raise ConfigError(key, "requires 'matrix'")

    x0 = None
    if "x0" in raw and raw["x0"] is not None:
        need_matrix("x0")
        x0 = _vector(raw["x0"], "x0", n)
    constants: tuple[np.ndarray, ...] = ()
    if "constants" in raw and raw["constants"] is not None:
        need_matrix("constants")
        c = raw["constants"]
        if isinstance(c, list) and c and all(isinstance(v, list) for v in c):
            constants = tuple(_vector(v, f"constants[{i}]", n) for i, v in enumerate(c))
        else:
            constants = (_vector(c, "constants", n),)
    modes = None
    if "modes" in raw:
        need_matrix("modes")
        modes = _modes(raw["modes"], n)

    samples = raw.get("samples", 200)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError("samples", f"expected an integer >= 2, got {samples!r}")
    depth = raw.get("depth", 10) if depth_override is None else depth_override
    if isinstance(depth, bool) or not isinstance(depth, int) or not 1 <= depth <= 40:
        raise ConfigError("depth", f"expected an integer in [1, 40], got {depth!r}")

    if "alphas" in raw:
        alphas = tuple(float(a) for a in _vector(raw["alphas"], "alphas"))
        for i, a in enumerate(alphas):
            if not 0.0 < a <= 1.0:
                raise ConfigError(f"alphas[{i}]", f"must lie in (0, 1], got {a}")
    else:
        alphas = tuple(round(0.05 * k, 10) for k in range(1, 21))

    outputs_raw = raw.get("outputs", [])
    if not isinstance(outputs_raw, list):
        raise ConfigError("outputs", "expected a list")
    outputs = []
    for i, o in enumerate(outputs_raw):
        if not isinstance(o, dict) or o.get("kind") not in OUTPUT_KINDS or not isinstance(o.get("path"), str):
            raise ConfigError(f"outputs[{i}]", "expected {\"kind\": \"csv\"|\"svg\", \"path\": <name>}")
        outputs.append(OutputSpec(o["kind"], o["path"]))

    return RunConfig(
        fractal, alpha, matrix, t_range, t0, x0, constants,
        samples, depth, alphas, tuple(outputs), modes,
    )


def load_config(path: str | Path, depth_override: int | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw, depth_override)
