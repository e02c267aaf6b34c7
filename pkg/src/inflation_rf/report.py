"""CSV and minimal static SVG renderings of experiment outputs.

Every writer here is deterministic: floats in CSVs use ``repr`` (exact
round trip) and SVG coordinates use fixed precision.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 480, 320, 48


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row])
    return buf.getvalue()


def importance_csv(imp) -> str:
    return csv_text(("feature", "raw", "normalized"), zip(imp.feature_names, imp.raw, imp.normalized))


def curve_csv(curve) -> str:
    return csv_text(("grid", "prediction"), zip(curve.grid, curve.predictions))


def surface_csv(name1: str, name2: str, g1, g2, Z) -> str:
    rows = ((a, b, Z[i, j]) for i, a in enumerate(g1) for j, b in enumerate(g2))
    return csv_text((name1, name2, "prediction"), rows)


def _scale(v, lo, hi, a, b):
    if hi == lo:
        return (a + b) / 2.0
    return a + (v - lo) / (hi - lo) * (b - a)


def _frame(title: str, xlabel: str, ylabel: str, body: list[str], xr, yr) -> str:
    x0, x1, y0, y1 = MARGIN, WIDTH - MARGIN / 2, HEIGHT - MARGIN, MARGIN / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1:.1f}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1:.1f}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.1f}" y="14" text-anchor="middle" font-size="12">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
        f'<text x="12" y="{HEIGHT / 2:.1f}" text-anchor="middle" font-size="11" transform="rotate(-90 12 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>',
    ]
    if xr is not None:
        out.append(f'<text x="{x0}" y="{y0 + 14}" font-size="9">{xr[0]:.3g}</text>')
        out.append(f'<text x="{x1:.1f}" y="{y0 + 14}" text-anchor="end" font-size="9">{xr[1]:.3g}</text>')
    out.append(f'<text x="{x0 - 4}" y="{y0}" text-anchor="end" font-size="9">{yr[0]:.3g}</text>')
    out.append(f'<text x="{x0 - 4}" y="{y1 + 8:.1f}" text-anchor="end" font-size="9">{yr[1]:.3g}</text>')
    return "\n".join(out + body + ["</svg>", ""])


def line_svg(x, y, title: str, xlabel: str = "", ylabel: str = "") -> str:
    x, y = np.asarray(x, float), np.asarray(y, float)
    xr, yr = (x.min(), x.max()), (y.min(), y.max())
    pts = " ".join(
        f"{_scale(a, *xr, MARGIN, WIDTH - MARGIN / 2):.2f},{_scale(b, *yr, HEIGHT - MARGIN, MARGIN / 2):.2f}"
        for a, b in zip(x, y)
    )
    body = [f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>']
    return _frame(title, xlabel, ylabel, body, xr, yr)


def bar_svg(labels: Sequence[str], values, title: str, ylabel: str = "") -> str:
    values = np.asarray(values, float)
    top = values.max() if values.size and values.max() > 0 else 1.0
    n = len(labels)
    slot = (WIDTH - 1.5 * MARGIN) / max(n, 1)
    body = []
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = _scale(max(v, 0.0), 0.0, top, 0.0, HEIGHT - 1.5 * MARGIN)
        x = MARGIN + i * slot + slot * 0.15
        body.append(
            f'<rect x="{x:.2f}" y="{HEIGHT - MARGIN - h:.2f}" width="{slot * 0.7:.2f}" height="{h:.2f}" fill="steelblue"/>'
        )
        body.append(
            f'<text x="{x + slot * 0.35:.2f}" y="{HEIGHT - MARGIN + 12}" text-anchor="middle" font-size="8">{escape(lab)}</text>'
        )
    return _frame(title, "", ylabel, body, None, (0.0, top))
