"""Static SVG rendering of decomposition components.

Output is deterministic for identical input: fixed 900x1200 canvas, no
timestamps or generated ids, and fixed-precision coordinates.
"""
from __future__ import annotations

import numpy as np

from .core import DecompositionResult

WIDTH = 900
HEIGHT = 1200
MARGIN_LEFT = 60
MARGIN_RIGHT = 20
PANEL_GAP = 40
PANEL_TOP = 30


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Panel:
    def __init__(self, title, y0, height, n, lo, hi):
        self.title = title
        self.y0 = y0
        self.height = height
        self.n = n
        if hi - lo < 1e-12:
            pad = max(abs(lo), 1.0) * 0.05 or 0.5
            lo, hi = lo - pad, hi + pad
        else:
            pad = (hi - lo) * 0.05
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi = lo, hi
        self.x0 = MARGIN_LEFT
        self.x1 = WIDTH - MARGIN_RIGHT

    def sx(self, i):
        if self.n <= 1:
            return (self.x0 + self.x1) / 2
        return self.x0 + (self.x1 - self.x0) * i / (self.n - 1)

    def sy(self, v):
        return self.y0 + self.height * (1 - (v - self.lo) / (self.hi - self.lo))

    def frame(self):
        return (
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.x1 - self.x0}" '
            f'height="{self.height}" fill="none" stroke="#999" stroke-width="1"/>'
            f'<text x="{self.x0}" y="{self.y0 - 8}" font-size="14" '
            f'font-family="sans-serif" fill="#333">{self.title}</text>'
        )

    def polyline(self, values, color, width=1.5, dash=None):
        pts = " ".join(
            f"{_fmt(self.sx(i))},{_fmt(self.sy(v))}" for i, v in enumerate(values)
        )
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash_attr}/>'
        )

    def vline(self, i, color="#cc3333"):
        x = _fmt(self.sx(i))
        return (
            f'<line class="changepoint" x1="{x}" y1="{self.y0}" x2="{x}" '
            f'y2="{self.y0 + self.height}" stroke="{color}" stroke-width="1" '
            f'stroke-dasharray="4,3"/>'
        )

    def marker(self, i, v, color="#cc3333"):
        return (
            f'<circle class="anomaly" cx="{_fmt(self.sx(i))}" '
            f'cy="{_fmt(self.sy(v))}" r="3.5" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )


def render_components_svg(result: DecompositionResult, path) -> str:
    """Write a four-panel component plot (observed+cleaned, trend with
    changepoint vlines, seasonal, residual with anomaly markers)."""
    observed = np.asarray(result.series.values)
    cleaned = np.asarray(result.cleaned)
    n = observed.size
    panel_h = (HEIGHT - PANEL_TOP - 4 * PANEL_GAP) // 4

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    def panel(idx, title, series_list):
        y0 = PANEL_TOP + idx * (panel_h + PANEL_GAP)
        allv = np.concatenate([np.asarray(s) for s, _ in series_list])
        return _Panel(title, y0, panel_h, n, float(allv.min()), float(allv.max()))

    p0 = panel(0, "observed / cleaned", [(observed, None), (cleaned, None)])
    parts.append(p0.frame())
    parts.append(p0.polyline(observed, "#bbbbbb", 1.0))
    parts.append(p0.polyline(cleaned, "#222222", 1.2))

    p1 = panel(1, "trend", [(result.trend, None)])
    parts.append(p1.frame())
    for b in result.changepoints.breaks:
        parts.append(p1.vline(b))
    parts.append(p1.polyline(result.trend, "#1f6fb2", 1.6))

    p2 = panel(2, "seasonal", [(result.seasonal, None)])
    parts.append(p2.frame())
    parts.append(p2.polyline(result.seasonal, "#2a9d5c", 1.4))

    p3 = panel(3, "residual", [(result.residual, None)])
    parts.append(p3.frame())
    parts.append(p3.polyline(result.residual, "#777777", 1.0))
    for i in result.anomalies.indices:
        parts.append(p3.marker(i, float(result.residual[i])))

    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return str(path)
