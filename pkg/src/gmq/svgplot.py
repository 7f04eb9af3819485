"""Minimal SVG line plots by direct text emission.

Plots are a viewing convenience; the CSV outputs are the interface of
record.  No plotting dependency is used.
"""

from __future__ import annotations

import math

from .serialize import fmt17

_WIDTH, _HEIGHT = 640, 420
_MARGIN = 60


def _transform(values, lo, hi, out_lo, out_hi, logscale):
    if logscale:
        lo, hi = math.log10(lo), math.log10(hi)
        values = [math.log10(v) for v in values]
    span = (hi - lo) or 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def svg_line_plot(path, xs, ys, title="", xlabel="", ylabel="", logy=False) -> None:
    """Write a single-series line plot with point markers to ``path``."""
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    if len(xs) != len(ys) or not xs:
        raise ValueError("xs and ys must be nonempty and of equal length")
    if logy and any(v <= 0 for v in ys):
        logy = False
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    px = _transform(xs, x0, x1, _MARGIN, _WIDTH - _MARGIN, False)
    py = _transform(ys, y0, y1, _HEIGHT - _MARGIN, _MARGIN, logy)
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    marks = "".join(
        f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="#1f6f8b"/>'
        for x, y in zip(px, py)
    )
    ytag = f"{ylabel} (log)" if logy else ylabel
    body = f"""<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
<text x="{_WIDTH // 2}" y="24" text-anchor="middle" font-size="16">{title}</text>
<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>
<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>
<text x="{_WIDTH // 2}" y="{_HEIGHT - 16}" text-anchor="middle" font-size="12">{xlabel}</text>
<text x="16" y="{_HEIGHT // 2}" font-size="12" transform="rotate(-90 16 {_HEIGHT // 2})" text-anchor="middle">{ytag}</text>
<text x="{_MARGIN}" y="{_HEIGHT - _MARGIN + 16}" font-size="10" text-anchor="middle">{fmt17(x0)}</text>
<text x="{_WIDTH - _MARGIN}" y="{_HEIGHT - _MARGIN + 16}" font-size="10" text-anchor="middle">{fmt17(x1)}</text>
<text x="{_MARGIN - 4}" y="{_HEIGHT - _MARGIN}" font-size="10" text-anchor="end">{fmt17(y0)}</text>
<text x="{_MARGIN - 4}" y="{_MARGIN + 4}" font-size="10" text-anchor="end">{fmt17(y1)}</text>
<polyline points="{points}" fill="none" stroke="#1f6f8b" stroke-width="1.5"/>
{marks}
</svg>
"""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)
