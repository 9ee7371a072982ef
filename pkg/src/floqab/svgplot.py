"""Minimal native SVG emission: line plots and heatmaps.

Plots are conveniences next to the CSV contract, so only the primitives
needed here are implemented (axes, ticks, a polyline, colored cells with a
diverging blue-white-red map).
"""

import math

import numpy as np

from .output import atomic_write_text

__all__ = ["line_plot_svg", "heatmap_svg"]

_W, _H = 860, 520
_ML, _MR, _MT, _MB = 80, 30, 40, 60


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(t)
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="13">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<text x="{_W / 2}" y="{_H - 14}" text-anchor="middle">{xlabel}</text>',
        f'<text x="20" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 20 {_H / 2})">{ylabel}</text>',
    ]


def line_plot_svg(path: str, x, y, title: str = "", xlabel: str = "", ylabel: str = ""):
    """Single-trace line plot with linear axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if y1 <= y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _MT + (y1 - v) / (y1 - y0) * ph

    parts = _frame(title, xlabel, ylabel)
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    for t in _ticks(x0, x1):
        parts.append(
            f'<line x1="{sx(t):.2f}" y1="{_MT + ph}" x2="{sx(t):.2f}" '
            f'y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(t):.2f}" y="{_MT + ph + 20}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(y0, y1, 5):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{sy(t):.2f}" x2="{_ML}" y2="{sy(t):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{sy(t):.2f}" text-anchor="end" '
            f'dominant-baseline="middle">{_fmt(t)}</text>'
        )
    points = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f5fbf" stroke-width="1.2"/>')
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")


def _diverging_color(v: float) -> str:
    """Map v in [-1, 1] to blue-white-red."""
    v = max(-1.0, min(1.0, v))
    if v >= 0:
        r, g, b = 255, round(255 * (1 - v)), round(255 * (1 - v))
    else:
        r, g, b = round(255 * (1 + v)), round(255 * (1 + v)), 255
    return f"rgb({r},{g},{b})"


def heatmap_svg(
    path: str,
    x,
    row_values,
    matrix,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
):
    """Row-by-frequency heatmap with a symmetric diverging color scale."""
    x = np.asarray(x, dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    n_rows, n_cols = matrix.shape
    scale = float(np.max(np.abs(matrix)))
    if scale == 0.0:
        scale = 1.0
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    cw, ch = pw / n_cols, ph / n_rows
    parts = _frame(title, xlabel, ylabel)
    for i in range(n_rows):
        for j in range(n_cols):
            color = _diverging_color(matrix[i, j] / scale)
            parts.append(
                f'<rect x="{_ML + j * cw:.2f}" y="{_MT + i * ch:.2f}" '
                f'width="{cw + 0.5:.2f}" height="{ch + 0.5:.2f}" fill="{color}"/>'
            )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    for t in _ticks(float(x.min()), float(x.max())):
        px = _ML + (t - x.min()) / (x.max() - x.min()) * pw
        parts.append(
            f'<line x1="{px:.2f}" y1="{_MT + ph}" x2="{px:.2f}" y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{_MT + ph + 20}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for i, rv in enumerate(row_values):
        parts.append(
            f'<text x="{_ML - 8}" y="{_MT + (i + 0.5) * ch:.2f}" text-anchor="end" '
            f'dominant-baseline="middle">{_fmt(rv)}</text>'
        )
    parts.append(
        f'<text x="{_W - _MR - 4}" y="{_MT - 8}" text-anchor="end" font-size="11">'
        f"scale: +/-{scale:.3e}</text>"
    )
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")
