"""SVG rendering of portrait glyphs for batch export.

One <path> per protein bar and per RNA strand (core disc and label are not
paths), so element counts in a sheet mirror the geometry that produced it.
"""

from __future__ import annotations

import math

from .geometry import PortraitGeometry, RnaGlyph

PALETTE = {
    "bright_red": "#e0413a",
    "light_grey": "#cfcfcf",
    "azure_blue": "#3e8ede",
    "mint_pink": "#f2a2c0",
    "gold_yellow": "#e3b53a",
    "pale_purple": "#b9a7d9",
    "normal_gray": "#c8c8c8",
    "silver_gray": "#9a9a9a",
    "dark_gray": "#515151",
    "charcoal": "#36454f",
}


def _pt(cx: float, cy: float, theta: float, r: float) -> tuple[float, float]:
    # theta is clockwise from the top; SVG y grows downward
    return (cx + r * math.sin(theta), cy - r * math.cos(theta))


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def _protein_path(p, cx, cy, rc_prime, width) -> str:
    mid = (p.theta0 + p.theta1) / 2.0
    x1, y1 = _pt(cx, cy, mid, rc_prime)
    x2, y2 = _pt(cx, cy, mid, rc_prime + max(p.height, 0.0))
    stroke = PALETTE[p.color_class]
    bar_w = max(0.4, 2.0 * rc_prime * math.sin(width * 0.32))
    return (f'<path d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(bar_w)}" '
            f'stroke-linecap="round" fill="none" class="protein {p.kind}"/>')


def _rna_path(r: RnaGlyph, cx, cy) -> str:
    sign = 1.0 if r.clockwise else -1.0
    cmds = []
    for k, (phi, rad) in enumerate(r.path):
        x, y = _pt(cx, cy, r.origin + sign * phi, rad)
        cmds.append(f"{'M' if k == 0 else 'L'} {_fmt(x)} {_fmt(y)}")
    return (f'<path d="{" ".join(cmds)}" stroke="{PALETTE[r.color]}" '
            f'stroke-width="1.2" fill="none" class="rna {r.category}"/>')


def portrait_svg(g: PortraitGeometry) -> str:
    """Render one portrait as a standalone SVG document."""
    margin = 6.0
    side = 2.0 * (g.crown_rc_prime + max(g.max_protein_height(), 0.0) + margin)
    cx = cy = side / 2.0
    width = (g.proteins[0].theta1 - g.proteins[0].theta0) if g.proteins else 0.5

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(side)} {_fmt(side)}" '
        f'width="{_fmt(side)}" height="{_fmt(side)}">',
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(g.crown_rc_prime)}" '
        f'fill="none" stroke="#e6e6e6" stroke-width="0.8" class="crown"/>',
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(g.crown_rc)}" '
        f'fill="#f7f7f7" stroke="#d0d0d0" stroke-width="0.6" class="core"/>',
    ]
    parts.extend(_protein_path(p, cx, cy, g.crown_rc_prime, width) for p in g.proteins)
    parts.extend(_rna_path(r, cx, cy) for r in g.rnas)
    parts.append(
        f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" '
        f'dominant-baseline="central" font-size="{_fmt(g.crown_rc * 0.42)}" '
        f'font-family="sans-serif" fill="#333">{_escape(g.label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
