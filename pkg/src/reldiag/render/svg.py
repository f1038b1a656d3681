"""SVG 1.1 emission for laid-out diagrams."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .layout import MARGIN, LayoutDiagram, Rect, TableBox
from .style import Style

SVG_NS = "http://www.w3.org/2000/svg"


def _num(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _rect(parent: ET.Element, r: Rect, **attrs: str) -> ET.Element:
    return ET.SubElement(
        parent, "rect", {"x": _num(r.x), "y": _num(r.y), "width": _num(r.w), "height": _num(r.h), **attrs}
    )


def _text(parent: ET.Element, x: float, y: float, text: str, style: Style, **attrs: str) -> None:
    el = ET.SubElement(
        parent,
        "text",
        {
            "x": _num(x),
            "y": _num(y),
            "font-family": style.font_family,
            "font-size": _num(style.font_size),
            "text-anchor": "middle",
            "dominant-baseline": "central",
            **attrs,
        },
    )
    el.text = text


def _table(parent: ET.Element, t: TableBox, style: Style, cell: int) -> None:
    kind = "output" if t.output else "table"
    g = ET.SubElement(parent, "g", {"class": kind, "id": f"c{cell}-{'out' if t.output else 't'}-{t.id}"})
    common = {"stroke": style.stroke, "stroke-width": _num(style.stroke_width)}
    head = style.output_fill if t.output else style.header_fill
    _rect(g, t.header, fill=head, **common)
    _text(g, t.header.x + t.header.w / 2, t.header.y + t.header.h / 2, t.title, style, fill=style.header_text)
    for row in t.rows:
        _rect(g, row.rect, fill=style.output_cell_fill if t.output else style.cell_fill, **common)
        _text(g, row.rect.x + row.rect.w / 2, row.rect.y + row.rect.h / 2, row.text, style, fill=style.stroke)


def emit_svg(ld: LayoutDiagram) -> str:
    """Well-formed SVG text; byte-identical for identical layouts."""
    style = ld.style
    width, height = ld.width + 2 * MARGIN, ld.height + 2 * MARGIN
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": _num(width),
            "height": _num(height),
            "viewBox": f"{_num(-MARGIN)} {_num(-MARGIN)} {_num(width)} {_num(height)}",
        },
    )
    defs = ET.SubElement(root, "defs")
    marker = ET.SubElement(
        defs,
        "marker",
        {
            "id": "arrow",
            "viewBox": "0 0 10 10",
            "refX": "10",
            "refY": "5",
            "markerWidth": "6",
            "markerHeight": "6",
            "orient": "auto",
        },
    )
    ET.SubElement(marker, "path", {"d": "M 0 0 L 10 5 L 0 10 z", "fill": style.stroke})
    _rect(root, Rect(-MARGIN, -MARGIN, width, height), fill=style.background)
    for x1, y1, x2, y2 in ld.separators:
        ET.SubElement(
            root,
            "line",
            {
                "class": "union-separator",
                "x1": _num(x1),
                "y1": _num(y1),
                "x2": _num(x2),
                "y2": _num(y2),
                "stroke": style.separator,
                "stroke-width": _num(style.stroke_width),
            },
        )
    for c in ld.cells:
        g = ET.SubElement(root, "g", {"class": "union-cell", "id": f"cell{c.index}"})
        for p in c.partitions:
            if p.negated:
                _rect(
                    g,
                    p.rect,
                    **{
                        "class": "partition",
                        "id": f"c{c.index}-{p.id}",
                        "rx": _num(style.corner_radius),
                        "fill": "none",
                        "stroke": style.stroke,
                        "stroke-width": _num(style.stroke_width),
                        "stroke-dasharray": style.dash,
                    },
                )
        for t in c.tables:
            _table(g, t, style, c.index)
        for e in c.edges:
            attrs = {
                "class": "edge",
                "points": " ".join(f"{_num(x)},{_num(y)}" for x, y in e.points),
                "fill": "none",
                "stroke": style.stroke,
                "stroke-width": _num(style.stroke_width),
            }
            if e.arrow:
                attrs["marker-end"] = "url(#arrow)"
            ET.SubElement(g, "polyline", attrs)
            if e.label is not None:
                _text(g, e.label_at[0], e.label_at[1], e.label, style, fill=style.stroke, **{"class": "edge-label"})
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"
