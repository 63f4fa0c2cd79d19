"""CSV tables and minimal SVG line plots."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

# first constant set red, second blue, as in the reference figures
PALETTE = ("red", "blue", "green", "orange", "purple", "brown", "black")


def fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(path: str | Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def write_svg(
    path: str | Path,
    series: Sequence[tuple[Sequence[float], Sequence[float], str, str]],
    title: str = "",
    xlabel: str = "x",
    ylabel: str = "y",
    width: int = 640,
    height: int = 400,
) -> Path:
    """Polyline plot; ``series`` holds ``(xs, ys, color, label)`` tuples."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    left, right, top, bottom = 70, 20, 30, 50
    xs_all = np.concatenate([np.asarray(s[0], float) for s in series])
    ys_all = np.concatenate([np.asarray(s[1], float) for s in series])
    finite = np.isfinite(ys_all)
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = (float(ys_all[finite].min()), float(ys_all[finite].max())) if finite.any() else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - left - right, height - top - bottom

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(
            f'<text x="{px(t):.1f}" y="{top + ph + 16}" text-anchor="middle" font-size="10">{t:.3g}</text>'
        )
    for t in _ticks(y0, y1):
        out.append(f'<text x="{left - 6}" y="{py(t) + 3:.1f}" text-anchor="end" font-size="10">{t:.3g}</text>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {top + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for k, (xs, ys, color, label) in enumerate(series):
        pts = " ".join(
            f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in zip(xs, ys) if math.isfinite(float(y))
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{left + pw - 4}" y="{top + 14 + 14 * k}" text-anchor="end" font-size="11" '
            f'fill="{color}">{escape(label)}</text>'
        )
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path
