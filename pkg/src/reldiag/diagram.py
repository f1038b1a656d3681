"""Relational Diagram intermediate representation.

A diagram is a list of union cells. Each cell holds a tree of canvas
partitions (every non-root partition is a negation box), table nodes with
attribute cells (optionally carrying a selection ``op value``), join edges
between cells, and an optional output table whose attributes link to cells
of root-partition tables. Geometry is not part of the IR.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

from .ast.common import FLIPPED, OPS, SYMMETRIC_OPS
from .catalog import Schema, sort_of
from .errors import DiagramError

VERSION = 1
CONDITIONS = {
    1: "negation boxes form a tree (nested or disjoint)",
    2: "each table and its cells reside in exactly one partition",
    3: "each leaf partition contains at least one table",
    4: "joins connect tables in the same partition or along an ancestor chain",
    5: "each output attribute links to exactly one root-partition attribute",
    6: "union cells share the output name and attribute set",
}

CellRef = tuple[str, int]


@dataclass(frozen=True)
class Partition:
    id: str
    parent: str | None = None

    @property
    def negated(self) -> bool:
        return self.parent is not None


@dataclass(frozen=True)
class AttributeCell:
    attr: str
    selection: tuple[str, Any] | None = None


@dataclass(frozen=True)
class TableNode:
    id: str
    relation: str
    partition: str
    cells: tuple[AttributeCell, ...] = ()


@dataclass(frozen=True)
class JoinEdge:
    """Predicate ``source op target`` between two attribute cells."""

    source: CellRef
    target: CellRef
    op: str = "="


@dataclass(frozen=True)
class OutputAttr:
    name: str
    link: CellRef


@dataclass(frozen=True)
class OutputNode:
    name: str
    attributes: tuple[OutputAttr, ...]


@dataclass(frozen=True)
class UnionCell:
    partitions: tuple[Partition, ...]
    tables: tuple[TableNode, ...] = ()
    edges: tuple[JoinEdge, ...] = ()
    output: OutputNode | None = None

    @property
    def root(self) -> Partition | None:
        roots = [p for p in self.partitions if p.parent is None]
        return roots[0] if len(roots) == 1 else None

    def table(self, tid: str) -> TableNode:
        for t in self.tables:
            if t.id == tid:
                return t
        raise DiagramError(f"unknown table {tid}")

    def children(self, pid: str) -> list[Partition]:
        return [p for p in self.partitions if p.parent == pid]

    def depth(self, pid: str) -> int:
        parents = {p.id: p.parent for p in self.partitions}
        d = 0
        seen = set()
        while parents.get(pid) is not None and pid not in seen:
            seen.add(pid)
            pid = parents[pid]
            d += 1
        return d

    def ancestors(self, pid: str) -> list[str]:
        """``pid`` followed by its ancestors up to the root."""
        parents = {p.id: p.parent for p in self.partitions}
        out = []
        while pid is not None and pid not in out:
            out.append(pid)
            pid = parents.get(pid)
        return out


@dataclass(frozen=True)
class Diagram:
    cells: tuple[UnionCell, ...]
    output_name: str | None = None
    schema_ref: str | None = field(default=None, compare=False)

    @property
    def is_union(self) -> bool:
        return len(self.cells) > 1

    def constants(self) -> set:
        return {
            c.selection[1]
            for cell in self.cells
            for t in cell.tables
            for c in t.cells
            if c.selection is not None
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "v": VERSION,
            "schema": self.schema_ref,
            "output": self.output_name,
            "cells": [_cell_to_dict(c) for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _cell_to_dict(c: UnionCell) -> dict[str, Any]:
    out: dict[str, Any] = {
        "partitions": [{"id": p.id, "parent": p.parent} for p in c.partitions],
        "tables": [
            {
                "id": t.id,
                "rel": t.relation,
                "partition": t.partition,
                "cells": [
                    {"attr": a.attr, **({"sel": {"op": a.selection[0], "value": a.selection[1]}} if a.selection else {})}
                    for a in t.cells
                ],
            }
            for t in c.tables
        ],
        "edges": [{"from": list(e.source), "to": list(e.target), "op": e.op} for e in c.edges],
    }
    if c.output is not None:
        out["output"] = {
            "name": c.output.name,
            "attrs": [{"name": a.name, "link": list(a.link)} for a in c.output.attributes],
        }
    return out


# ---------------------------------------------------------------------------
# decoding


def _need(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise DiagramError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise DiagramError(f"{where}: field {key!r} has the wrong type")
    return value


def _ref(value, where: str) -> CellRef:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not isinstance(value[0], str)
        or not isinstance(value[1], int)
        or isinstance(value[1], bool)
    ):
        raise DiagramError(f"{where}: cell reference must be [table-id, index]")
    return value[0], value[1]


def from_dict(doc: dict) -> Diagram:
    if not isinstance(doc, dict):
        raise DiagramError("diagram document must be a JSON object")
    if doc.get("v", VERSION) != VERSION:
        raise DiagramError(f"unsupported diagram version {doc.get('v')!r}")
    cells = []
    for ci, cd in enumerate(_need(doc, "cells", list, "diagram")):
        where = f"cell {ci}"
        parts = tuple(
            Partition(_need(p, "id", str, where), p.get("parent")) for p in _need(cd, "partitions", list, where)
        )
        tables = []
        for td in cd.get("tables", []):
            attrs = []
            for ad in _need(td, "cells", list, where):
                sel = None
                if isinstance(ad, dict) and ad.get("sel") is not None:
                    s = ad["sel"]
                    op = _need(s, "op", str, where)
                    if op == "<>":
                        op = "!="
                    if op not in OPS:
                        raise DiagramError(f"{where}: unknown operator {op!r}")
                    value = _need(s, "value", (int, str), where)
                    if isinstance(value, bool):
                        raise DiagramError(f"{where}: selection value must be an integer or string")
                    sel = (op, value)
                attrs.append(AttributeCell(_need(ad, "attr", str, where), sel))
            tables.append(
                TableNode(
                    _need(td, "id", str, where),
                    _need(td, "rel", str, where),
                    _need(td, "partition", str, where),
                    tuple(attrs),
                )
            )
        edges = []
        for ed in cd.get("edges", []):
            op = ed.get("op", "=") if isinstance(ed, dict) else "="
            if op == "<>":
                op = "!="
            if op not in OPS:
                raise DiagramError(f"{where}: unknown operator {op!r}")
            edges.append(JoinEdge(_ref(_need(ed, "from", None, where), where), _ref(_need(ed, "to", None, where), where), op))
        output = None
        if cd.get("output") is not None:
            od = cd["output"]
            attrs_out = tuple(
                OutputAttr(_need(a, "name", str, where), _ref(_need(a, "link", None, where), where))
                for a in _need(od, "attrs", list, where)
            )
            output = OutputNode(_need(od, "name", str, where), attrs_out)
        cells.append(UnionCell(parts, tuple(tables), tuple(edges), output))
    if not cells:
        raise DiagramError("diagram has no cells")
    return Diagram(tuple(cells), doc.get("output"), doc.get("schema"))


def from_json(text: str) -> Diagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"invalid JSON: {exc}") from None
    return from_dict(doc)


# ---------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class DiagramViolation:
    condition: int
    message: str
    elements: tuple[str, ...] = ()
    cell: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"condition": self.condition, "message": self.message, "elements": list(self.elements), "cell": self.cell}


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[DiagramViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def conditions(self) -> set[int]:
        return {v.condition for v in self.violations}

    def to_dict(self) -> dict[str, Any]:
        return {"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


def _cell_exists(cell: UnionCell, ref: CellRef) -> bool:
    tables = [t for t in cell.tables if t.id == ref[0]]
    return len(tables) == 1 and 0 <= ref[1] < len(tables[0].cells)


def _validate_cell(cell: UnionCell, ci: int, schema: Schema | None, out: list[DiagramViolation]) -> None:
    def bad(cond: int, msg: str, *elements: str) -> None:
        out.append(DiagramViolation(cond, msg, tuple(elements), ci))

    # 1: partitions form a rooted tree
    ids = [p.id for p in cell.partitions]
    tree_ok = True
    dups = sorted({i for i in ids if ids.count(i) > 1})
    if dups:
        bad(1, f"duplicate partition ids {dups}", *dups)
        tree_ok = False
    roots = [p.id for p in cell.partitions if p.parent is None]
    if len(roots) != 1:
        bad(1, f"expected exactly one root partition, found {len(roots)}", *roots)
        tree_ok = False
    known = set(ids)
    for p in cell.partitions:
        if p.parent is not None and p.parent not in known:
            bad(1, f"partition {p.id} has unknown parent {p.parent}", p.id)
            tree_ok = False
    if tree_ok:
        parents = {p.id: p.parent for p in cell.partitions}
        for p in cell.partitions:
            seen, cur = set(), p.id
            while cur is not None:
                if cur in seen:
                    bad(1, f"partition {p.id} lies on a containment cycle", p.id)
                    tree_ok = False
                    break
                seen.add(cur)
                cur = parents[cur]
            if not tree_ok:
                break

    # 2: tables discernible, each in exactly one partition
    tids = [t.id for t in cell.tables]
    for tid in sorted({i for i in tids if tids.count(i) > 1}):
        places = sorted({t.partition for t in cell.tables if t.id == tid})
        bad(2, f"table {tid} appears {tids.count(tid)} times (partitions {places})", tid, *places)
    for t in cell.tables:
        if t.partition not in known:
            bad(2, f"table {t.id} placed in unknown partition {t.partition}", t.id)
        if schema is not None:
            if t.relation not in schema:
                bad(2, f"table {t.id} uses unknown relation {t.relation}", t.id)
                continue
            rel = schema.relation(t.relation)
            for i, a in enumerate(t.cells):
                if a.attr not in rel.attribute_names:
                    bad(2, f"table {t.id} cell {i}: {t.relation} has no attribute {a.attr}", t.id)
                elif a.selection is not None and sort_of(a.selection[1]) != rel.sort(a.attr):
                    bad(2, f"table {t.id} cell {i}: selection value sort differs from {a.attr}", t.id)

    # 3: every leaf partition holds a table
    if tree_ok:
        occupied = {t.partition for t in cell.tables}
        for p in cell.partitions:
            if not cell.children(p.id) and p.id not in occupied:
                bad(3, f"leaf partition {p.id} contains no table", p.id)

    # 4: joins along ancestor chains only
    for k, e in enumerate(cell.edges):
        label = f"edge{k}"
        if not (_cell_exists(cell, e.source) and _cell_exists(cell, e.target)):
            bad(4, f"edge {k} has a dangling endpoint", label)
            continue
        if e.source[0] == e.target[0] and e.source[1] == e.target[1]:
            bad(4, f"edge {k} connects a cell to itself", label)
            continue
        if not tree_ok:
            continue
        a = cell.table(e.source[0]).partition
        b = cell.table(e.target[0]).partition
        if a in known and b in known and a not in cell.ancestors(b) and b not in cell.ancestors(a):
            bad(4, f"edge {k} joins partitions {a} and {b}, which are not on one ancestor chain", label, e.source[0], e.target[0])
        if schema is not None and all(t in schema for t in (cell.table(e.source[0]).relation, cell.table(e.target[0]).relation)):
            s1 = _cell_sort(cell, e.source, schema)
            s2 = _cell_sort(cell, e.target, schema)
            if s1 and s2 and s1 != s2:
                bad(4, f"edge {k} compares attributes of different sorts", label)

    # 5: output links
    if cell.output is not None:
        root = cell.root
        if not cell.output.attributes:
            bad(5, "output table has no attributes", cell.output.name)
        names = [a.name for a in cell.output.attributes]
        for n in sorted({n for n in names if names.count(n) > 1}):
            bad(5, f"output attribute {n} repeats", cell.output.name)
        for a in cell.output.attributes:
            if not _cell_exists(cell, a.link):
                bad(5, f"output attribute {a.name} links to a missing cell {list(a.link)}", cell.output.name, a.link[0])
                continue
            t = cell.table(a.link[0])
            if root is None or t.partition != root.id:
                bad(5, f"output attribute {a.name} links to table {t.id} outside the root partition", cell.output.name, t.id)
            elif t.cells[a.link[1]].selection is not None:
                bad(5, f"output attribute {a.name} links to a selection cell", cell.output.name, t.id)


def _cell_sort(cell: UnionCell, ref: CellRef, schema: Schema) -> str | None:
    t = cell.table(ref[0])
    rel = schema.relation(t.relation)
    attr = t.cells[ref[1]].attr
    return rel.sort(attr) if attr in rel.attribute_names else None


def validate(d: Diagram, schema: Schema | None = None) -> ValidityReport:
    """Check the six validity conditions (schema checks only when ``schema`` is given)."""
    out: list[DiagramViolation] = []
    for ci, cell in enumerate(d.cells):
        _validate_cell(cell, ci, schema, out)
    outputs = [c.output for c in d.cells]
    if len(d.cells) > 1 or d.output_name is not None:
        shapes = {
            (o.name, frozenset(a.name for a in o.attributes)) if o is not None else None for o in outputs
        }
        if len(shapes) > 1:
            names = tuple(sorted(str(s[0]) if s else "-" for s in shapes))
            out.append(DiagramViolation(6, "union cells disagree on the output table", names))
        if d.output_name is not None:
            for ci, o in enumerate(outputs):
                if o is None or o.name != d.output_name:
                    out.append(DiagramViolation(6, f"cell {ci} output is not named {d.output_name}", (str(ci),), ci))
    return ValidityReport(tuple(out))


# ---------------------------------------------------------------------------
# normalization


def _cell_key(a: AttributeCell) -> tuple:
    if a.selection is None:
        return (a.attr, 0, 0, False, 0)
    op, v = a.selection
    return (a.attr, 1, OPS.index(op), isinstance(v, str), v)


def normalize_cell(cell: UnionCell) -> UnionCell:
    order = {t.id: i for i, t in enumerate(cell.tables)}
    remap: dict[CellRef, CellRef] = {}
    tables = []
    for t in cell.tables:
        keyed = sorted(range(len(t.cells)), key=lambda i: _cell_key(t.cells[i]))
        new_cells: list[AttributeCell] = []
        for i in keyed:
            c = t.cells[i]
            if c in new_cells:
                remap[(t.id, i)] = (t.id, new_cells.index(c))
            else:
                remap[(t.id, i)] = (t.id, len(new_cells))
                new_cells.append(c)
        tables.append(replace(t, cells=tuple(new_cells)))

    def pos(ref: CellRef) -> tuple:
        return (order[ref[0]], ref[1])

    edges = set()
    for e in cell.edges:
        a, b, op = remap[e.source], remap[e.target], e.op
        if op in (">", ">="):
            a, b, op = b, a, FLIPPED[op]
        elif op in SYMMETRIC_OPS and pos(b) < pos(a):
            a, b = b, a
        edges.add(JoinEdge(a, b, op))
    output = cell.output
    if output is not None:
        output = replace(
            output, attributes=tuple(replace(x, link=remap[x.link]) for x in output.attributes)
        )
    sorted_edges = tuple(sorted(edges, key=lambda e: (pos(e.source), pos(e.target), OPS.index(e.op))))
    return UnionCell(cell.partitions, tuple(tables), sorted_edges, output)


def normalize(d: Diagram) -> Diagram:
    """Flip ``>``/``>=`` edges, sort and dedupe cells and edges. Idempotent.

    Raises :class:`DiagramError` for invalid diagrams.
    """
    report = validate(d)
    if not report.ok:
        raise DiagramError(f"invalid diagram: {report.violations[0].message}")
    return replace(d, cells=tuple(normalize_cell(c) for c in d.cells))


def require_valid(d: Diagram, schema: Schema | None = None) -> None:
    report = validate(d, schema)
    if not report.ok:
        v = report.violations[0]
        raise DiagramError(f"invalid diagram (condition {v.condition}): {v.message}")


__all__ = [
    "CONDITIONS",
    "AttributeCell",
    "Diagram",
    "DiagramViolation",
    "JoinEdge",
    "OutputAttr",
    "OutputNode",
    "Partition",
    "TableNode",
    "UnionCell",
    "ValidityReport",
    "from_dict",
    "from_json",
    "normalize",
    "require_valid",
    "validate",
]
