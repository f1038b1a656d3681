"""Layout and SVG / DOT emission for Relational Diagrams."""

from .dot import emit_dot
from .layout import CellLayout, EdgeLine, LayoutDiagram, PartitionBox, Rect, TableBox, check_layout, layout
from .style import DEFAULT_STYLE, Style, parse_style
from .svg import emit_svg


def render_svg(d, style: Style = DEFAULT_STYLE) -> str:
    return emit_svg(layout(d, style))


__all__ = [
    "DEFAULT_STYLE",
    "CellLayout",
    "EdgeLine",
    "LayoutDiagram",
    "PartitionBox",
    "Rect",
    "Style",
    "TableBox",
    "check_layout",
    "emit_dot",
    "emit_svg",
    "layout",
    "parse_style",
    "render_svg",
]
