"""Minimal hand-written SVG line plots (linear axes, round-number ticks)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=80, right=30, top=30, bottom=70)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#000000", "#9467bd")
DASHES = ("", "6,4", "2,3", "10,3,2,3", "")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round-number tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_plot(series, xlabel: str, ylabel: str, title: str = "", comment: str = "") -> str:
    """Render ``series`` = [(label, xs, ys), ...] as an SVG document.

    Non-finite points split a series into separate runs; every series still
    gets exactly one <polyline> (its longest run) plus a legend entry.
    """
    xs_all = [x for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    ys_all = [y for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    x0, x1 = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    y0, y1 = (min(0.0, min(ys_all)), max(ys_all)) if ys_all else (0.0, 1.0)
    xt = nice_ticks(x0, x1)
    yt = nice_ticks(y0, y1)
    if xt:
        x0, x1 = min(x0, xt[0]), max(x1, xt[-1])
    if yt:
        y0, y1 = min(y0, yt[0]), max(y1, yt[-1])
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
    ]
    if comment:
        out.append(f"<!-- {escape(comment.replace('--', '- -'))} -->")
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    bx, by = MARGIN["left"], MARGIN["top"]
    out.append(f'<rect x="{bx}" y="{by}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in xt:
        X = _fmt(px(t))
        out.append(f'<line x1="{X}" y1="{by + ph}" x2="{X}" y2="{by + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{by + ph + 22}" font-size="13" text-anchor="middle">{t:g}</text>')
    for t in yt:
        Y = _fmt(py(t))
        out.append(f'<line x1="{bx - 6}" y1="{Y}" x2="{bx}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{bx - 10}" y="{Y}" font-size="13" text-anchor="end" dominant-baseline="middle">{t:g}</text>')
    out.append(f'<text x="{bx + pw / 2:.2f}" y="{HEIGHT - 20}" font-size="15" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{by + ph / 2:.2f}" font-size="15" text-anchor="middle" '
        f'transform="rotate(-90 20 {by + ph / 2:.2f})">{escape(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{bx + pw / 2:.2f}" y="20" font-size="15" text-anchor="middle">{escape(title)}</text>')

    for k, (label, xs, ys) in enumerate(series):
        runs, cur = [], []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                cur.append((x, y))
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        run = max(runs, key=len) if runs else []
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in run)
        dash = f' stroke-dasharray="{DASHES[k % len(DASHES)]}"' if DASHES[k % len(DASHES)] else ""
        out.append(
            f'<polyline data-label="{escape(label)}" fill="none" stroke="{COLORS[k % len(COLORS)]}" '
            f'stroke-width="2"{dash} points="{pts}"/>'
        )

    lx, ly = bx + pw - 230, by + 15
    out.append('<g class="legend">')
    for k, (label, _, _) in enumerate(series):
        yk = ly + 20 * k
        dash = f' stroke-dasharray="{DASHES[k % len(DASHES)]}"' if DASHES[k % len(DASHES)] else ""
        out.append(f'<line x1="{lx}" y1="{yk}" x2="{lx + 30}" y2="{yk}" stroke="{COLORS[k % len(COLORS)]}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 38}" y="{yk}" font-size="13" dominant-baseline="middle">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
