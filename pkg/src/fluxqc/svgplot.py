"""Minimal deterministic SVG line charts for sweep outputs.

Hand-rolled rather than delegated to a plotting library so that identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_DASHES = ("none", "6,3", "2,2", "8,3,2,3", "4,4", "1,2")


def _transform(value: float, lo: float, hi: float, log: bool) -> float:
    if log:
        value, lo, hi = math.log10(value), math.log10(lo), math.log10(hi)
    if hi == lo:
        return 0.5
    return (value - lo) / (hi - lo)


def _ticks(lo: float, hi: float, log: bool, count: int = 5):
    if log:
        lo_e, hi_e = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]
    step = (hi - lo) / (count - 1)
    return [lo + k * step for k in range(count)]


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.1e}"
    return f"{v:g}"


def svg_line_chart(series, title: str, xlabel: str, ylabel: str,
                   logx: bool = False, logy: bool = False,
                   width: int = 640, height: int = 440) -> str:
    """Render labeled (xs, ys) series as a self-contained SVG document.

    ``series`` is an iterable of ``(label, xs, ys)``.
    """
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    points = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)]
    if not points:
        raise ValueError("nothing to plot")
    xs_all = [p[0] for p in points]
    ys_all = [p[1] for p in points]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if not logy and y_lo != y_hi:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    left, right, top, bottom = 72, 24, 40, 56
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + pw * _transform(x, x_lo, x_hi, logx)

    def py(y):
        return top + ph * (1.0 - _transform(y, y_lo, y_hi, logy))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#333" stroke-width="1"/>',
    ]
    for t in _ticks(x_lo, x_hi, logx):
        if not x_lo <= t <= x_hi:
            continue
        x = px(t)
        out.append(f'<line x1="{x:.1f}" y1="{top+ph}" x2="{x:.1f}" '
                   f'y2="{top+ph+5}" stroke="#333"/>')
        out.append(f'<text x="{x:.1f}" y="{top+ph+18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    for t in _ticks(y_lo, y_hi, logy):
        if not y_lo <= t <= y_hi:
            continue
        y = py(t)
        out.append(f'<line x1="{left-5}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" '
                   'stroke="#333"/>')
        out.append(f'<text x="{left-8}" y="{y+4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    out.append(f'<text x="{left+pw/2:.1f}" y="{height-12}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{top+ph/2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {top+ph/2:.1f})">{ylabel}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        dash = _DASHES[idx % len(_DASHES)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        style = f'stroke="{color}" fill="none" stroke-width="1.5"'
        if dash != "none":
            style += f' stroke-dasharray="{dash}"'
        out.append(f'<polyline points="{pts}" {style}/>')
        ly = top + 16 + 16 * idx
        out.append(f'<line x1="{left+pw-110}" y1="{ly}" x2="{left+pw-86}" '
                   f'y2="{ly}" {style}/>')
        out.append(f'<text x="{left+pw-80}" y="{ly+4}" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
