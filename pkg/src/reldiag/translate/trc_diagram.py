"""TRC* queries to Relational Diagrams and back."""

from __future__ import annotations

from ..ast.checks import classify_trc, lift_output_links
from ..ast.common import FLIPPED, Const
from ..ast.trc import (
    AttrRef,
    Negation,
    Output,
    OutputColumn,
    Predicate,
    Quantifier,
    Scope,
    TrcQuery,
    quantifiers,
)
from ..diagram import (
    AttributeCell,
    Diagram,
    JoinEdge,
    OutputAttr,
    OutputNode,
    Partition,
    TableNode,
    UnionCell,
    normalize,
    validate,
)
from ..errors import TranslationError
from ..parse.trc import RESERVED
from .trace import TraceLog, TranslationTrace


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    k = 2
    while f"{name}{k}" in taken:
        k += 1
    return f"{name}{k}"


def trc_to_diagram(q: TrcQuery) -> tuple[Diagram, TranslationTrace]:
    """Draw a canonical, guarded, non-disjunctive TRC query as a single-cell diagram.

    Every negation scope becomes a partition (``p0`` is the root, the rest
    numbered in preorder) and every table variable becomes a table node.
    """
    q = lift_output_links(q)
    report = classify_trc(q)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"cannot draw query ({v.kind}): {v.message}")
    log = TraceLog()
    partitions: list[Partition] = []
    tables: list[list] = []  # [id, relation, partition]
    cells: dict[str, list[AttributeCell]] = {}
    edges: list[JoinEdge] = []
    used: set[str] = set()
    selections: list[str] = []
    joins: list[str] = []

    def plain(tid: str, attr: str) -> tuple[str, int]:
        cs = cells[tid]
        for i, c in enumerate(cs):
            if c.attr == attr and c.selection is None:
                return tid, i
        cs.append(AttributeCell(attr))
        return tid, len(cs) - 1

    def visit(scope: Scope, pid: str, parent: str | None, env: dict[str, str]) -> dict[str, str]:
        partitions.append(Partition(pid, parent))
        env = dict(env)
        for quant in scope.quantified:
            tid = _fresh(quant.var, used)
            used.add(tid)
            env[quant.var] = tid
            tables.append([tid, quant.relation, pid])
            cells[tid] = []
        for c in scope.conjuncts:
            if isinstance(c, Negation):
                visit(c.scope, f"p{len(partitions)}", pid, env)
                continue
            left, op, right = c.left, c.op, c.right
            if isinstance(left, Const):
                left, op, right = right, FLIPPED[op], left
            if isinstance(right, Const):
                tid = env[left.var]
                cells[tid].append(AttributeCell(left.attr, (op, right.value)))
                selections.append(f"{tid}.{left.attr} {op} {right.value!r}")
            else:
                edges.append(JoinEdge(plain(env[left.var], left.attr), plain(env[right.var], right.attr), op))
                joins.append(f"{env[left.var]}.{left.attr} {op} {env[right.var]}.{right.attr}")
        return env

    root_env = visit(q.body, "p0", None, {})
    log.step("partition the canvas by the negation hierarchy", *(p.id for p in partitions))
    log.step("one table per table variable", *(t[0] for t in tables))
    log.step("selection predicates become attribute cells with a condition", *selections)
    log.step("join predicates become edges between attribute cells", *joins)
    output = None
    if q.output is not None:
        attrs = tuple(
            OutputAttr(col.name, plain(root_env[col.source.var], col.source.attr)) for col in q.output.columns
        )
        output = OutputNode(q.output.name, attrs)
        log.step("link output attributes to root tables", *(f"{a.name}->{a.link[0]}" for a in attrs))
    else:
        log.step("Boolean query: no output table")
    cell = UnionCell(
        tuple(partitions),
        tuple(TableNode(tid, rel, pid, tuple(cells[tid])) for tid, rel, pid in tables),
        tuple(edges),
        output,
    )
    d = normalize(Diagram((cell,), q.output.name if q.output else None))
    return d, log.trace("trc", "diagram", range(len(tables)))


def _variable_names(cell: UnionCell, reserved: set[str]) -> dict[str, str]:
    counts: dict[str, int] = {}
    for t in cell.tables:
        counts[t.relation] = counts.get(t.relation, 0) + 1
    seen: dict[str, int] = {}
    taken = set(reserved)
    names = {}
    for t in cell.tables:
        base = t.relation.lower()
        if counts[t.relation] > 1:
            seen[t.relation] = seen.get(t.relation, 0) + 1
            base = f"{base}{seen[t.relation]}"
        name = _fresh(base, taken)
        taken.add(name)
        names[t.id] = name
    return names


def cell_to_trc(cell: UnionCell) -> tuple[TrcQuery, list[int]]:
    """TRC reading of one union cell, plus the table-to-quantifier position map."""
    root = cell.root
    reserved = set(RESERVED)
    if cell.output is not None:
        reserved.add(cell.output.name)
    names = _variable_names(cell, reserved)
    depth = {p.id: cell.depth(p.id) for p in cell.partitions}

    def ref(c: tuple[str, int]) -> AttrRef:
        return AttrRef(names[c[0]], cell.table(c[0]).cells[c[1]].attr)

    def scope(pid: str) -> Scope:
        mine = [t for t in cell.tables if t.partition == pid]
        quants = tuple(Quantifier(names[t.id], t.relation) for t in mine)
        conj: list = []
        for t in mine:
            for a in t.cells:
                if a.selection is not None:
                    op, value = a.selection
                    conj.append(Predicate(AttrRef(names[t.id], a.attr), op, Const(value)))
        for e in cell.edges:
            ps = cell.table(e.source[0]).partition
            pt = cell.table(e.target[0]).partition
            if (ps if depth[ps] >= depth[pt] else pt) == pid:
                conj.append(Predicate(ref(e.source), e.op, ref(e.target)))
        for child in cell.children(pid):
            conj.append(Negation(scope(child.id)))
        return Scope(quants, tuple(conj))

    body = scope(root.id)
    output = None
    if cell.output is not None:
        output = Output(cell.output.name, tuple(OutputColumn(a.name, ref(a.link)) for a in cell.output.attributes))
    q = TrcQuery(output, body)
    order = [x.var for x in quantifiers(q)]
    return q, [order.index(names[t.id]) for t in cell.tables]


def diagram_to_trc(d: Diagram) -> tuple[TrcQuery, TranslationTrace]:
    """Read a valid single-cell diagram as a canonical TRC query.

    Each partition becomes a negation scope; each predicate sits in the
    deeper of the two partitions it touches.
    """
    report = validate(d)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"invalid diagram (condition {v.condition}): {v.message}")
    if d.is_union:
        raise TranslationError("diagram has several union cells; read it with union_to_trc")
    cell = d.cells[0]
    log = TraceLog()
    log.step("determine nested negation scopes from partitions", *(p.id for p in cell.partitions))
    log.step("quantify each table in its partition", *(t.id for t in cell.tables))
    log.step("selection cells become selection predicates")
    log.step("edges become join predicates in the deeper partition")
    log.step("output attributes become the output linkage" if cell.output else "no output: Boolean sentence")
    q, corr = cell_to_trc(cell)
    return q, log.trace("diagram", "trc", corr)


def union_to_trc(d: Diagram) -> list[TrcQuery]:
    """One TRC query per union cell; the diagram denotes the union of their answers."""
    report = validate(d)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"invalid diagram (condition {v.condition}): {v.message}")
    return [cell_to_trc(c)[0] for c in d.cells]
