"""Graphviz DOT emission with one nested cluster per canvas partition."""

from __future__ import annotations

from html import escape

from ..ast.common import SYMMETRIC_OPS
from ..diagram import Diagram, TableNode, UnionCell, require_valid
from .layout import _row_text
from .style import DEFAULT_STYLE, Style


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(title: str, rows: list[str], head: str, head_text: str, fill: str) -> str:
    parts = [
        '<<TABLE BORDER="0" CELLBORDER="1" CELLSPACING="0">',
        f'<TR><TD BGCOLOR="{head}"><FONT COLOR="{head_text}">{escape(title)}</FONT></TD></TR>',
    ]
    for i, r in enumerate(rows):
        parts.append(f'<TR><TD PORT="a{i}" BGCOLOR="{fill}">{escape(r)}</TD></TR>')
    parts.append("</TABLE>>")
    return "".join(parts)


class _Emitter:
    def __init__(self, style: Style):
        self.style = style
        self.lines: list[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def table(self, depth: int, node: str, t: TableNode) -> None:
        s = self.style
        label = _label(t.relation, [_row_text(a.attr, a.selection) for a in t.cells], s.header_fill, s.header_text, s.cell_fill)
        self.emit(depth, f"{_quote(node)} [label={label}];")

    def partition(self, cell: UnionCell, ci: int, pid: str, depth: int) -> None:
        negated = cell.root.id != pid
        self.emit(depth, f"subgraph {_quote(f'cluster_c{ci}_{pid}')} {{")
        if negated:
            self.emit(depth + 1, 'style="dashed,rounded";')
        else:
            self.emit(depth + 1, "style=solid;")
            self.emit(depth + 1, f"color={_quote(self.style.separator)};")
        self.emit(depth + 1, f"label={_quote(pid)};")
        if not negated and cell.output is not None:
            s = self.style
            out = cell.output
            label = _label(out.name, [a.name for a in out.attributes], s.output_fill, s.header_text, s.output_cell_fill)
            self.emit(depth + 1, f"{_quote(f'c{ci}_out')} [label={label}];")
        for t in cell.tables:
            if t.partition == pid:
                self.table(depth + 1, f"c{ci}_t_{t.id}", t)
        for child in cell.children(pid):
            self.partition(cell, ci, child.id, depth + 1)
        self.emit(depth, "}")

    def edge(self, src: str, dst: str, op: str) -> None:
        attrs = ["dir=none"] if op in SYMMETRIC_OPS else ["arrowhead=normal"]
        if op != "=":
            attrs.append(f"label={_quote(op)}")
        self.emit(1, f"{src} -> {dst} [{', '.join(attrs)}];")


def emit_dot(d: Diagram, style: Style = DEFAULT_STYLE) -> str:
    """DOT text for a valid diagram; union cells become top-level clusters."""
    require_valid(d)
    em = _Emitter(style)
    em.emit(0, "digraph diagram {")
    em.emit(1, "rankdir=LR;")
    em.emit(1, f"node [shape=plaintext, fontname={_quote(style.font_family)}];")
    em.emit(1, f"edge [color={_quote(style.stroke)}];")
    for ci, cell in enumerate(d.cells):
        em.partition(cell, ci, cell.root.id, 1)
    for ci, cell in enumerate(d.cells):
        for e in cell.edges:
            src = f"{_quote(f'c{ci}_t_{e.source[0]}')}:a{e.source[1]}"
            dst = f"{_quote(f'c{ci}_t_{e.target[0]}')}:a{e.target[1]}"
            em.edge(src, dst, e.op)
        if cell.output is not None:
            for i, a in enumerate(cell.output.attributes):
                em.edge(f"{_quote(f'c{ci}_out')}:a{i}", f"{_quote(f'c{ci}_t_{a.link[0]}')}:a{a.link[1]}", "=")
    em.emit(0, "}")
    return "\n".join(em.lines) + "\n"
