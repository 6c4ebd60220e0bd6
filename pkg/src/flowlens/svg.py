"""Static SVG rendering of Sankey, radial, and violin layouts.

Output is deterministic: fixed element ordering and 3-decimal coordinate
precision, so identical layouts render to byte-identical documents.
"""

from __future__ import annotations

import math
from typing import Sequence

from .layout import RadialLayout, SankeyLayout

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
)

_MARGIN = 24.0
_NODE_WIDTH = 12.0


def _fmt(value: float) -> str:
    out = f"{value:.3f}"
    return "0.000" if out == "-0.000" else out


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _document(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_sankey_svg(layout: SankeyLayout, size: tuple[float, float] = (960, 600)) -> str:
    width, height = size
    usable_h = height - 2 * _MARGIN
    span = width - 2 * _MARGIN - _NODE_WIDTH
    step = span / (layout.layer_count - 1) if layout.layer_count > 1 else 0.0

    def node_x(layer: int) -> float:
        return _MARGIN + layer * step

    def y(v: float) -> float:
        return _MARGIN + v * usable_h

    body: list[str] = []
    for link in layout.links:
        src = layout.nodes[link.source]
        tgt = layout.nodes[link.target]
        sx = node_x(src.layer) + _NODE_WIDTH
        tx = node_x(tgt.layer)
        mx = (sx + tx) / 2.0
        sy0 = y(src.y_top + link.source_offset)
        sy1 = y(src.y_top + link.source_offset + link.thickness)
        ty0 = y(tgt.y_top + link.target_offset)
        ty1 = y(tgt.y_top + link.target_offset + link.thickness)
        d = (
            f"M {_fmt(sx)},{_fmt(sy0)} "
            f"C {_fmt(mx)},{_fmt(sy0)} {_fmt(mx)},{_fmt(ty0)} {_fmt(tx)},{_fmt(ty0)} "
            f"L {_fmt(tx)},{_fmt(ty1)} "
            f"C {_fmt(mx)},{_fmt(ty1)} {_fmt(mx)},{_fmt(sy1)} {_fmt(sx)},{_fmt(sy1)} Z"
        )
        color = PALETTE[src.color_index % len(PALETTE)]
        body.append(f'<path d="{d}" fill="{color}" fill-opacity="0.40"/>')
    for node in layout.nodes:
        color = PALETTE[node.color_index % len(PALETTE)]
        body.append(
            f'<rect x="{_fmt(node_x(node.layer))}" y="{_fmt(y(node.y_top))}" '
            f'width="{_fmt(_NODE_WIDTH)}" height="{_fmt(node.height * usable_h)}" '
            f'fill="{color}"/>'
        )
    for node in layout.nodes:
        mid = y(node.y_top + node.height / 2.0)
        if node.layer == layout.layer_count - 1:
            tx = node_x(node.layer) - 4.0
            anchor = "end"
        else:
            tx = node_x(node.layer) + _NODE_WIDTH + 4.0
            anchor = "start"
        body.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(mid)}" font-size="10" '
            f'text-anchor="{anchor}" dominant-baseline="middle">'
            f"{_escape(node.label)}</text>"
        )
    return _document(width, height, body)


def render_radial_svg(layout: RadialLayout, size: tuple[float, float] = (720, 720)) -> str:
    width, height = size
    cx, cy = width / 2.0, height / 2.0
    rim = min(width, height) / 2.0 - _MARGIN

    def point(node: str) -> tuple[float, float]:
        radius, angle = layout.placements[node]
        return cx + rim * radius * math.cos(angle), cy + rim * radius * math.sin(angle)

    weights = layout.weights or {}
    max_weight = max(weights.values(), default=0.0)
    body: list[str] = []
    for parent, child in layout.edges:
        x1, y1 = point(parent)
        x2, y2 = point(child)
        body.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="#b8c4cc" stroke-width="1.0"/>'
        )
    for node in layout.placements:
        x, y = point(node)
        share = weights.get(node, 0.0) / max_weight if max_weight > 0 else 0.0
        r = 2.5 + 4.0 * share
        body.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="#4e79a7"/>'
        )
    return _document(width, height, body)


def render_violin_svg(
    outline: Sequence[tuple[float, float]], size: tuple[float, float] = (240, 480)
) -> str:
    """Render a violin polygon; offsets map to x, grid values to y (top = max)."""
    width, height = size
    xs = [p[0] for p in outline]
    ys = [p[1] for p in outline]
    x_extent = max(abs(min(xs)), abs(max(xs))) or 1.0
    y_min, y_max = min(ys), max(ys)
    y_span = (y_max - y_min) or 1.0
    half = width / 2.0 - _MARGIN

    def px(p: tuple[float, float]) -> str:
        x = width / 2.0 + p[0] / x_extent * half
        y = _MARGIN + (y_max - p[1]) / y_span * (height - 2 * _MARGIN)
        return f"{_fmt(x)},{_fmt(y)}"

    points = " ".join(px(p) for p in outline)
    body = [f'<polygon points="{points}" fill="#76b7b2" stroke="#2f6f6a"/>']
    return _document(width, height, body)


def render_svg(layout, size: tuple[float, float] | None = None) -> str:
    """Dispatch on layout type; see the specialized renderers."""
    if isinstance(layout, SankeyLayout):
        return render_sankey_svg(layout, size or (960, 600))
    if isinstance(layout, RadialLayout):
        return render_radial_svg(layout, size or (720, 720))
    if isinstance(layout, Sequence):
        return render_violin_svg(layout, size or (240, 480))
    raise TypeError(f"cannot render {type(layout).__name__} as SVG")
