"""Critical-distance diagrams as standalone SVG.

The output is assembled from formatted strings only, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from ..errors import InputError
from .ranking import nemenyi_groups

WIDTH = 640
MARGIN = 170
AXIS_Y = 70
ROW_H = 18
BAR_GAP = 9
FONT = 'font-family="Helvetica, Arial, sans-serif"'


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_cd_svg(avg_ranks: Sequence[float], names: Sequence[str], cd: float) -> str:
    k = len(avg_ranks)
    if k < 2 or len(names) != k:
        raise InputError("cd diagram needs >= 2 methods and one name per rank")
    ranks = [float(r) for r in avg_ranks]
    if any(not (1.0 - 1e-9 <= r <= k + 1e-9) for r in ranks):
        raise InputError(f"average ranks must lie in [1, {k}]")
    lo, hi = MARGIN, WIDTH - MARGIN

    def x(rank):
        return lo + (rank - 1.0) * (hi - lo) / (k - 1)

    groups = nemenyi_groups(ranks, cd)
    order = sorted(range(k), key=lambda i: (ranks[i], i))
    n_left = math.ceil(k / 2)
    bars_h = BAR_GAP * (len(groups) + 1)
    label_top = AXIS_Y + bars_h + 12
    height = label_top + ROW_H * max(n_left, k - n_left) + 20

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        f'<g {FONT} font-size="12" fill="black" stroke="black">',
    ]
    # CD ruler
    cd_end = min(x(1.0 + cd), hi) if cd > 0 else lo
    out.append(f'<line x1="{_fmt(lo)}" y1="20.00" x2="{_fmt(cd_end)}" y2="20.00" stroke-width="1.5"/>')
    for xx in (lo, cd_end):
        out.append(f'<line x1="{_fmt(xx)}" y1="15.00" x2="{_fmt(xx)}" y2="25.00" stroke-width="1.5"/>')
    out.append(
        f'<text x="{_fmt((lo + cd_end) / 2)}" y="12.00" text-anchor="middle" stroke="none">'
        f"CD = {cd:.3f}</text>"
    )
    # axis and ticks
    out.append(f'<line x1="{_fmt(lo)}" y1="{AXIS_Y}.00" x2="{_fmt(hi)}" y2="{AXIS_Y}.00" stroke-width="1.5"/>')
    for t in range(1, k + 1):
        out.append(f'<line x1="{_fmt(x(t))}" y1="{AXIS_Y - 8}.00" x2="{_fmt(x(t))}" y2="{AXIS_Y}.00"/>')
        out.append(
            f'<text x="{_fmt(x(t))}" y="{AXIS_Y - 12}.00" text-anchor="middle" stroke="none">{t}</text>'
        )
        if t < k:
            out.append(f'<line x1="{_fmt(x(t + 0.5))}" y1="{AXIS_Y - 4}.00" x2="{_fmt(x(t + 0.5))}" y2="{AXIS_Y}.00"/>')
    # group bars
    for g, members in enumerate(groups, 1):
        y = AXIS_Y + BAR_GAP * g
        x1 = x(min(ranks[i] for i in members)) - 4
        x2 = x(max(ranks[i] for i in members)) + 4
        out.append(
            f'<line class="group" x1="{_fmt(x1)}" y1="{y}.00" x2="{_fmt(x2)}" y2="{y}.00" '
            f'stroke-width="4" stroke-linecap="round"/>'
        )
    # method labels
    for pos, i in enumerate(order):
        xr = x(ranks[i])
        if pos < n_left:
            y = label_top + ROW_H * pos
            xt, anchor, xl = lo - 10, "end", lo - 5
        else:
            y = label_top + ROW_H * (k - 1 - pos)
            xt, anchor, xl = hi + 10, "start", hi + 5
        out.append(
            f'<polyline fill="none" points="{_fmt(xr)},{AXIS_Y}.00 {_fmt(xr)},{y}.00 {_fmt(xl)},{y}.00"/>'
        )
        out.append(
            f'<text class="method" x="{_fmt(xt)}" y="{y + 4}.00" text-anchor="{anchor}" stroke="none">'
            f"{escape(str(names[i]))} ({ranks[i]:.3f})</text>"
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cd_diagram(avg_ranks, names, cd: float, path) -> Path:
    """Write the diagram to ``path`` and return it."""
    svg = render_cd_svg(avg_ranks, names, cd)
    p = Path(path)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return p
