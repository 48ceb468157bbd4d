"""Minimal static grouped bar chart in SVG.

Deterministic text output: fixed number formatting, no ids or timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd")


@dataclass
class Series:
    name: str
    values: Sequence[float]
    axis: str = "left"  # "left" or "right"


def _f(x: float) -> str:
    return f"{x:.2f}"


def bar_chart(title: str, categories: Sequence[str], series: Sequence[Series],
              left_range=(0.0, 1.0), right_range=(0.0, 7.0),
              left_label="probability", right_label="mean score",
              width=480, height=300) -> str:
    ml, mr, mt, mb = 52, 52, 36, 56
    pw, ph = width - ml - mr, height - mt - mb
    ncat, nser = max(len(categories), 1), max(len(series), 1)
    group = pw / ncat
    bar = group * 0.8 / nser

    def y_of(v, rng):
        lo, hi = rng
        frac = 0.0 if hi == lo else (min(max(v, lo), hi) - lo) / (hi - lo)
        return mt + ph * (1 - frac)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_f(width / 2)}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    has_right = any(s.axis == "right" for s in series)
    if has_right:
        out.append(f'<line x1="{ml + pw}" y1="{mt}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>')
    for i in range(6):
        v = left_range[0] + (left_range[1] - left_range[0]) * i / 5
        y = y_of(v, left_range)
        out.append(f'<text x="{ml - 6}" y="{_f(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{v:.1f}</text>')
        if has_right:
            rv = right_range[0] + (right_range[1] - right_range[0]) * i / 5
            out.append(f'<text x="{ml + pw + 6}" y="{_f(y + 4)}" font-family="sans-serif" '
                       f'font-size="10">{rv:.1f}</text>')
    out.append(f'<text x="14" y="{_f(mt + ph / 2)}" font-family="sans-serif" font-size="10" '
               f'transform="rotate(-90 14 {_f(mt + ph / 2)})" text-anchor="middle">'
               f'{escape(left_label)}</text>')
    if has_right:
        rx = width - 10
        out.append(f'<text x="{rx}" y="{_f(mt + ph / 2)}" font-family="sans-serif" '
                   f'font-size="10" transform="rotate(90 {rx} {_f(mt + ph / 2)})" '
                   f'text-anchor="middle">{escape(right_label)}</text>')
    for ci, cat in enumerate(categories):
        gx = ml + group * ci + group * 0.1
        for si, s in enumerate(series):
            rng = right_range if s.axis == "right" else left_range
            v = float(s.values[ci])
            y = y_of(v, rng)
            out.append(
                f'<rect x="{_f(gx + bar * si)}" y="{_f(y)}" width="{_f(bar)}" '
                f'height="{_f(mt + ph - y)}" fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{_f(ml + group * (ci + 0.5))}" y="{mt + ph + 16}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                   f'{escape(str(cat))}</text>')
    lx = ml
    for si, s in enumerate(series):
        x = lx + si * (pw / nser)
        out.append(f'<rect x="{_f(x)}" y="{height - 22}" width="10" height="10" '
                   f'fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{_f(x + 14)}" y="{height - 13}" font-family="sans-serif" '
                   f'font-size="10">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
