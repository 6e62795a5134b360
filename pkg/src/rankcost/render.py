"""ASCII and SVG rendering of instances and routed solutions."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .grid import ProblemInstance, RoutingOutcome

PATH_GLYPHS = "abcdfghijklmnopqrtuvwxyz0123456789"
COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def render_ascii(instance: ProblemInstance, outcome: Optional[RoutingOutcome] = None) -> str:
    """One character per cell: ``#`` obstacle, ``.`` free, ``S``/``E`` pins and
    a per-net glyph (cycling through ``PATH_GLYPHS``) along each path."""
    g = instance.grid
    rows = [["."] * g.width for _ in range(g.height)]
    for v in g.obstacles:
        rows[v.y][v.x] = "#"
    if outcome is not None:
        for i, path in enumerate(outcome.paths):
            for v in path or ():
                rows[v.y][v.x] = PATH_GLYPHS[i % len(PATH_GLYPHS)]
    for net in instance.nets:
        rows[net.start.y][net.start.x] = "S"
        rows[net.end.y][net.end.x] = "E"
    return "\n".join("".join(r) for r in rows) + "\n"


def render_svg(instance: ProblemInstance, outcome: Optional[RoutingOutcome] = None, cell: int = 20) -> str:
    g = instance.grid
    w, h = g.width * cell, g.height * cell
    half = cell / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        '<g stroke="#dddddd" stroke-width="1">',
    ]
    for x in range(g.width + 1):
        out.append(f'<line x1="{x * cell}" y1="0" x2="{x * cell}" y2="{h}"/>')
    for y in range(g.height + 1):
        out.append(f'<line x1="0" y1="{y * cell}" x2="{w}" y2="{y * cell}"/>')
    out.append("</g>")
    out.append('<g fill="black">')
    for v in sorted(g.obstacles):
        out.append(f'<rect x="{v.x * cell}" y="{v.y * cell}" width="{cell}" height="{cell}"/>')
    out.append("</g>")
    if outcome is not None:
        for i, path in enumerate(outcome.paths):
            if not path:
                continue
            pts = " ".join(f"{v.x * cell + half},{v.y * cell + half}" for v in path)
            color = COLORS[i % len(COLORS)]
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="{cell * 0.3:.1f}" stroke-linecap="round" stroke-linejoin="round"/>'
            )
    r = cell * 0.35
    for i, net in enumerate(instance.nets):
        for pin, fill, label in ((net.start, "#f2c40f", "S"), (net.end, "#3cb043", "E")):
            cx, cy = pin.x * cell + half, pin.y * cell + half
            out.append(f'<circle cx="{cx}" cy="{cy}" r="{r:.1f}" fill="{fill}" stroke="black"/>')
            out.append(
                f'<text x="{cx}" y="{cy + cell * 0.15:.1f}" font-size="{cell * 0.4:.1f}" '
                f'text-anchor="middle">{escape(label)}{i}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
