"""Deterministic SVG rendering of LER-vs-p curves (log-scale y axis)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .evaluate import DecodeReport

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 20, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
DASHES = ("", "6,3", "2,2", "8,3,2,3")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-12:
        ticks.append(round(t, 10))
        t += step
    return ticks


def render_curves(reports: Sequence[DecodeReport], thresholds: Sequence[float] = (),
                  title: str = "") -> str:
    """One polyline per ``(decoder, L)``; zero-LER points are left out."""
    if not reports:
        raise ValueError("render_curves needs at least one report")
    curves: dict[tuple[str, int], list[tuple[float, float]]] = {}
    for rep in reports:
        for (dec, L), (ps, lers) in rep.curves().items():
            pts = curves.setdefault((dec, L), [])
            pts.extend((float(p), float(y)) for p, y in zip(ps, lers) if y > 0)
    curves = {k: sorted(set(v)) for k, v in sorted(curves.items()) if v}
    if not curves:
        raise ValueError("no curve has a positive LER to plot")
    xs = [p for pts in curves.values() for p, _ in pts] + list(thresholds)
    ys = [y for pts in curves.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo * 0.9, x_hi * 1.1 if x_hi else 1.0
    y_lo = 10.0 ** math.floor(math.log10(min(ys)))
    y_hi = 10.0 ** math.ceil(math.log10(max(ys)))
    if y_hi == y_lo:
        y_hi *= 10
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return MARGIN_T + (math.log10(y_hi) - math.log10(y)) / (math.log10(y_hi) - math.log10(y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="DejaVu Sans, sans-serif" font-size="11">',
        f'<rect id="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="14" text-anchor="middle">{escape(title)}</text>')
    # axes
    x0, y0 = MARGIN_L, MARGIN_T + ph
    out.append(f'<line id="x-axis" x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line id="y-axis" x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for t in _nice_ticks(x_lo, x_hi):
        X = sx(t)
        out.append(f'<line x1="{_fmt(X)}" y1="{y0}" x2="{_fmt(X)}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{y0 + 18}" text-anchor="middle">{t:g}</text>')
    decade = int(round(math.log10(y_lo)))
    while 10.0 ** decade <= y_hi * (1 + 1e-9):
        Y = sy(10.0 ** decade)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(Y)}" x2="{x0 + pw}" y2="{_fmt(Y)}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{x0 - 8}" y="{_fmt(Y + 4)}" text-anchor="end">1e{decade}</text>')
        decade += 1
    out.append(f'<text x="{x0 + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">'
               f'physical error rate p</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">logical error rate</text>')
    for t in thresholds:
        X = sx(t)
        out.append(f'<line class="threshold" x1="{_fmt(X)}" y1="{MARGIN_T}" x2="{_fmt(X)}" '
                   f'y2="{y0}" stroke="gray" stroke-dasharray="4,4"/>')
    # curves and legend
    decoders = sorted({d for d, _ in curves})
    sizes = sorted({L for _, L in curves})
    for i, ((dec, L), pts) in enumerate(curves.items()):
        color = PALETTE[sizes.index(L) % len(PALETTE)]
        dash = DASHES[decoders.index(dec) % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{_fmt(sx(p))},{_fmt(sy(y))}" for p, y in pts)
        cid = f"curve-{i}"
        out.append(f'<polyline id="{cid}" fill="none" stroke="{color}" stroke-width="1.5"'
                   f'{dash_attr} points="{coords}"/>')
        for p, y in pts:
            out.append(f'<circle cx="{_fmt(sx(p))}" cy="{_fmt(sy(y))}" r="2.5" fill="{color}"/>')
        ly = MARGIN_T + 14 + 16 * i
        lx = WIDTH - MARGIN_R + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(dec)} L={L}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_files(paths: Sequence[str], out_path: str, thresholds: Sequence[float] = ()) -> str:
    if not paths:
        raise ValueError("plot needs at least one input CSV")
    svg = render_curves([DecodeReport.from_csv(p) for p in paths], thresholds)
    with open(out_path, "w", newline="\n") as fh:
        fh.write(svg)
    return svg
