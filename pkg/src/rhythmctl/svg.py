"""Minimal static SVG line plots (no plotting dependency)."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf")
PANEL_W, PANEL_H = 640, 200
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 32
MAX_POINTS = 2000


def _thin(t, y):
    step = max(1, int(np.ceil(t.size / MAX_POINTS)))
    return t[::step], y[::step]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _panel(panel: dict, top: float) -> list[str]:
    series = panel["series"]
    logy = panel.get("logy", False)
    t_all = np.concatenate([np.asarray(t, float) for t, _, _ in series])
    ys = []
    for _, y, _ in series:
        y = np.asarray(y, float)
        ys.append(np.log10(np.maximum(y, 1e-300)) if logy else y)
    y_all = np.concatenate(ys)
    finite = y_all[np.isfinite(y_all)]
    if logy:
        finite = finite[finite > -300]
    t0, t1 = float(t_all.min()), float(t_all.max())
    y0, y1 = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if t1 == t0:
        t1 = t0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    w = PANEL_W - MARGIN_L - MARGIN_R
    h = PANEL_H - MARGIN_T - MARGIN_B
    left, base = MARGIN_L, top + MARGIN_T

    def sx(t):
        return left + (t - t0) / (t1 - t0) * w

    def sy(v):
        return base + h - (v - y0) / (y1 - y0) * h

    out = [
        f'<text x="{left}" y="{top + 18}" font-size="13">{escape(panel.get("title", ""))}</text>',
        f'<rect x="{left}" y="{base}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
        f'<text x="{left - 6}" y="{base + 10}" font-size="10" text-anchor="end">'
        f'{("1e" + _fmt(y1)) if logy else _fmt(y1)}</text>',
        f'<text x="{left - 6}" y="{base + h}" font-size="10" text-anchor="end">'
        f'{("1e" + _fmt(y0)) if logy else _fmt(y0)}</text>',
        f'<text x="{left}" y="{base + h + 14}" font-size="10">{_fmt(t0)}</text>',
        f'<text x="{left + w}" y="{base + h + 14}" font-size="10" text-anchor="end">{_fmt(t1)}</text>',
        f'<text x="{left + w / 2}" y="{base + h + 26}" font-size="10" text-anchor="middle">'
        f'{escape(panel.get("xlabel", "t"))}</text>',
    ]
    for k, ((t, _, label), y) in enumerate(zip(series, ys)):
        t, y = _thin(np.asarray(t, float), y)
        ok = np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t[ok], y[ok]))
        color = PALETTE[k % len(PALETTE)]
        dash = ' stroke-dasharray="4 3"' if label and label.startswith("ref") else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1"{dash} points="{pts}">'
                   f'<title>{escape(label or "")}</title></polyline>')
    return out


def write_panels(path, panels: list[dict], title: str = "") -> Path:
    """Write vertically stacked panels; each panel is a dict with ``series``
    (list of ``(t, y, label)``), optional ``title``, ``xlabel`` and ``logy``."""
    path = Path(path)
    height = PANEL_H * len(panels) + 24
    body = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" '
            f'viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif">',
            f'<text x="{PANEL_W / 2}" y="16" font-size="14" text-anchor="middle">{escape(title)}</text>']
    for i, panel in enumerate(panels):
        body.extend(_panel(panel, 24 + i * PANEL_H))
    body.append("</svg>")
    path.write_text("\n".join(body) + "\n")
    return path
