"""Deterministic geometry for valid diagrams.

Recursive box packing: inside a partition the output table (root only),
then the partition's tables, then its child partitions are placed left to
right and top-aligned. Union cells sit side by side with a separator
between them. Edges are straight segments between the facing sides of two
attribute rows; a join inside one table loops around its right side.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..ast.common import FLIPPED, SYMMETRIC_OPS
from ..catalog import format_value
from ..diagram import Diagram, TableNode, UnionCell, require_valid
from .style import DEFAULT_STYLE, Style

TABLE_PAD = 4.0
PARTITION_PAD = 8.0
CELL_GAP = 16.0
HEADER_H = 12.0
ROW_H = 11.0
TEXT_PAD = 3.0
LOOP = 0.75 * TABLE_PAD
MARGIN = 4.0


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    def contains(self, other: Rect) -> bool:
        """Strict containment: ``other`` lies inside without touching the border."""
        return self.x < other.x and self.y < other.y and other.right < self.right and other.bottom < self.bottom

    def disjoint(self, other: Rect) -> bool:
        return other.x >= self.right or self.x >= other.right or other.y >= self.bottom or self.y >= other.bottom


@dataclass(frozen=True)
class PartitionBox:
    id: str
    parent: str | None
    rect: Rect

    @property
    def negated(self) -> bool:
        return self.parent is not None


@dataclass(frozen=True)
class RowBox:
    text: str
    rect: Rect
    selection: bool = False


@dataclass(frozen=True)
class TableBox:
    id: str
    title: str
    partition: str | None
    rect: Rect
    header: Rect
    rows: tuple[RowBox, ...]
    output: bool = False


@dataclass(frozen=True)
class EdgeLine:
    """Polyline drawn left to right; ``arrow`` marks an asymmetric operator."""

    points: tuple[tuple[float, float], ...]
    label: str | None
    arrow: bool
    label_at: tuple[float, float]
    source: tuple[str, int]
    target: tuple[str, int]


@dataclass(frozen=True)
class CellLayout:
    index: int
    rect: Rect
    partitions: tuple[PartitionBox, ...]
    tables: tuple[TableBox, ...]
    edges: tuple[EdgeLine, ...]

    def partition(self, pid: str) -> PartitionBox:
        return next(p for p in self.partitions if p.id == pid)

    def table(self, tid: str) -> TableBox:
        return next(t for t in self.tables if t.id == tid and not t.output)

    @property
    def output(self) -> TableBox | None:
        return next((t for t in self.tables if t.output), None)


@dataclass(frozen=True)
class LayoutDiagram:
    diagram: Diagram
    width: float
    height: float
    cells: tuple[CellLayout, ...]
    separators: tuple[tuple[float, float, float, float], ...]
    style: Style = DEFAULT_STYLE


def _text_width(text: str, style: Style) -> float:
    return len(text) * style.char_width + 2 * TEXT_PAD


def _row_text(attr: str, selection) -> str:
    if selection is None:
        return attr
    op, value = selection
    return f"{attr} {op} {format_value(value)}"


def _table_size(title: str, rows: list[str], style: Style) -> tuple[float, float]:
    w = max([_text_width(title, style)] + [_text_width(r, style) for r in rows])
    return w, HEADER_H + ROW_H * len(rows)


class _CellLayout:
    def __init__(self, cell: UnionCell, index: int, style: Style):
        self.cell = cell
        self.index = index
        self.style = style
        self.sizes: dict[str, tuple[float, float]] = {}
        self.tables: list[TableBox] = []
        self.partitions: list[PartitionBox] = []

    def items(self, pid: str) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = []
        if pid == self.cell.root.id and self.cell.output is not None:
            out.append(("output", self.cell.output))
        out.extend(("table", t) for t in self.cell.tables if t.partition == pid)
        out.extend(("partition", p.id) for p in self.cell.children(pid))
        return out

    def table_rows(self, t: TableNode) -> list[str]:
        return [_row_text(a.attr, a.selection) for a in t.cells]

    def item_size(self, kind: str, obj) -> tuple[float, float]:
        if kind == "output":
            return _table_size(obj.name, [a.name for a in obj.attributes], self.style)
        if kind == "table":
            return _table_size(obj.relation, self.table_rows(obj), self.style)
        return self.size(obj)

    def size(self, pid: str) -> tuple[float, float]:
        if pid not in self.sizes:
            dims = [self.item_size(k, o) for k, o in self.items(pid)]
            w = sum(d[0] for d in dims) + TABLE_PAD * max(len(dims) - 1, 0) + 2 * PARTITION_PAD
            h = max((d[1] for d in dims), default=0.0) + 2 * PARTITION_PAD
            self.sizes[pid] = (w, h)
        return self.sizes[pid]

    def place_table(self, tid: str, title: str, pid: str | None, rows: list[tuple[str, bool]], x: float, y: float, output: bool):
        w, h = _table_size(title, [r for r, _ in rows], self.style)
        boxes = tuple(
            RowBox(text, Rect(x, y + HEADER_H + ROW_H * i, w, ROW_H), sel) for i, (text, sel) in enumerate(rows)
        )
        self.tables.append(TableBox(tid, title, pid, Rect(x, y, w, h), Rect(x, y, w, HEADER_H), boxes, output))

    def place(self, pid: str, x: float, y: float) -> None:
        w, h = self.size(pid)
        parent = next(p.parent for p in self.cell.partitions if p.id == pid)
        self.partitions.append(PartitionBox(pid, parent, Rect(x, y, w, h)))
        cx, cy = x + PARTITION_PAD, y + PARTITION_PAD
        for kind, obj in self.items(pid):
            iw, _ = self.item_size(kind, obj)
            if kind == "output":
                rows = [(a.name, False) for a in obj.attributes]
                self.place_table(obj.name, obj.name, None, rows, cx, cy, True)
            elif kind == "table":
                rows = [(_row_text(a.attr, a.selection), a.selection is not None) for a in obj.cells]
                self.place_table(obj.id, obj.relation, pid, rows, cx, cy, False)
            else:
                self.place(obj, cx, cy)
            cx += iw + TABLE_PAD

    def row(self, ref: tuple[str, int], output: bool = False) -> Rect:
        t = next(b for b in self.tables if b.id == ref[0] and b.output == output)
        return t.rows[ref[1]].rect

    def edge(self, src_ref, op: str, dst_ref, src_output: bool = False) -> EdgeLine:
        a, b = self.row(src_ref, src_output), self.row(dst_ref)
        if a.x > b.x:
            a, b = b, a
            src_ref, dst_ref = dst_ref, src_ref
            op = FLIPPED[op]
        ya, yb = a.y + a.h / 2, b.y + b.h / 2
        if a.x == b.x:
            loop = a.right + LOOP
            points = ((a.right, ya), (loop, ya), (loop, yb), (b.right, yb))
            label_at = (loop + 1, (ya + yb) / 2)
        else:
            points = ((a.right, ya), (b.x, yb))
            label_at = ((a.right + b.x) / 2, (ya + yb) / 2 - 2)
        label = None if op == "=" else op
        return EdgeLine(points, label, op not in SYMMETRIC_OPS, label_at, src_ref, dst_ref)

    def run(self, x: float, y: float) -> CellLayout:
        root = self.cell.root.id
        self.place(root, x, y)
        edges = [self.edge(e.source, e.op, e.target) for e in self.cell.edges]
        if self.cell.output is not None:
            name = self.cell.output.name
            edges.extend(self.edge((name, i), "=", a.link, True) for i, a in enumerate(self.cell.output.attributes))
        w, h = self.size(root)
        return CellLayout(self.index, Rect(x, y, w, h), tuple(self.partitions), tuple(self.tables), tuple(edges))


def layout(d: Diagram, style: Style = DEFAULT_STYLE) -> LayoutDiagram:
    """Geometry for a valid diagram; identical inputs give identical layouts."""
    require_valid(d)
    cells = []
    separators = []
    x = 0.0
    for i, cell in enumerate(d.cells):
        if i:
            separators.append((x + CELL_GAP / 2, 0.0))
            x += CELL_GAP
        c = _CellLayout(cell, i, style).run(x, 0.0)
        cells.append(c)
        x = c.rect.right
    height = max(c.rect.h for c in cells)
    seps = tuple((sx, sy, sx, height) for sx, sy in separators)
    return LayoutDiagram(d, x, height, tuple(cells), seps, style)


def check_layout(ld: LayoutDiagram) -> list[str]:
    """Geometric invariants; returns a list of problems (empty when all hold)."""
    problems = []
    for c, cell in zip(ld.cells, ld.diagram.cells):
        for p in c.partitions:
            for q in c.partitions:
                if p.id == q.id:
                    continue
                inside = p.id in cell.ancestors(q.id)
                if inside != p.rect.contains(q.rect):
                    problems.append(f"cell {c.index}: containment of {q.id} in {p.id} is {not inside}")
                if not inside and q.id not in cell.ancestors(p.id) and not p.rect.disjoint(q.rect):
                    problems.append(f"cell {c.index}: partitions {p.id} and {q.id} overlap")
        for t in c.tables:
            if t.output:
                continue
            home = c.partition(t.partition).rect
            if not home.contains(t.rect):
                problems.append(f"cell {c.index}: table {t.id} leaves partition {t.partition}")
            for child in cell.children(t.partition):
                if not c.partition(child.id).rect.disjoint(t.rect):
                    problems.append(f"cell {c.index}: table {t.id} overlaps partition {child.id}")
        for e in c.edges:
            if e.arrow and e.points[0][0] > e.points[-1][0]:
                problems.append(f"cell {c.index}: edge {e.source}->{e.target} points right to left")
    return problems
