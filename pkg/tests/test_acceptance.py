"""Acceptance criteria: one test per criterion, each printing a single PASS/FAIL line."""

import random
import time
import xml.dom.minidom
import xml.etree.ElementTree as ET

import pytest

from fixtures import (
    BOOLEAN_OR_TRC,
    DISJUNCTION_SQL,
    DIVISION,
    DIVISION_QUERIES,
    DIVISION_SET1,
    DIVISION_SET2,
    FIXTURES,
    ISO_Q1,
    ISO_Q2,
    RED_OR_BLUE_TRC,
    SAILORS,
    SAILORS_BOATS,
    SIMILAR_PAIR,
    SINGLE,
    SQL_VARIETY,
    SQL_VARIETY_TRC,
    SUPPLIERS,
    THREE,
    TRC_FIXTURES,
    UNARY,
    UNION_SQL,
    UNION_TRC,
)
from oracles import naive_trc, random_database, same_up_to_renaming
from reldiag.catalog import Database
from reldiag.diagram import (
    AttributeCell,
    Diagram,
    JoinEdge,
    OutputAttr,
    OutputNode,
    Partition,
    TableNode,
    UnionCell,
    validate,
)
from reldiag.errors import TranslationError
from reldiag.eval import Bound, compile_query, equivalent_bounded, evaluate
from reldiag.parse import parse
from reldiag.pattern import dissociate, pattern_isomorphic, similar_pattern
from reldiag.render import emit_dot, emit_svg, layout
from reldiag.translate import (
    cell_to_trc,
    datalog_to_ra,
    datalog_to_trc,
    diagram_to_trc,
    eliminate_disjunction,
    ra_to_datalog,
    sql_to_trc,
    trc_to_datalog,
    trc_to_diagram,
    trc_to_sql,
)

ROUND_TRIP_SECONDS = 5.0
EQUIVALENCE_SECONDS = 60.0
PRESERVATION_SECONDS = 120.0
EQUIVALENCE_BOUND = Bound(domain_size=2, trials=100, random_size=3, seed=1)
# Dissociation multiplies the relations; the exhaustive tier is capped lower here.
PRESERVATION_BOUND = Bound(domain_size=2, trials=100, random_size=3, seed=1, max_databases=1 << 14)
UNION_TRIALS = 50


def report(criterion: int, title: str, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {title}: {'PASS' if ok else 'FAIL'} ({detail})")


def trc(name):
    return parse("trc", FIXTURES[name].text)


def test_round_trip_soundness():
    start = time.perf_counter()
    failures = []
    for f in TRC_FIXTURES:
        q = parse("trc", f.text)
        d, _ = trc_to_diagram(q)
        back, _ = diagram_to_trc(d)
        if not same_up_to_renaming(q, back):
            failures.append(f.name)
    elapsed = time.perf_counter() - start
    ok = len(TRC_FIXTURES) >= 25 and not failures and elapsed < ROUND_TRIP_SECONDS
    report(1, "round-trip soundness", ok, f"{len(TRC_FIXTURES)} queries, failures={failures}, {elapsed:.2f}s")
    assert ok


def translation_pairs(q, schema):
    """(label, source, target) for every directed translation reachable from ``q``."""
    d, _ = trc_to_diagram(q)
    sql, _ = trc_to_sql(q)
    prog, _ = trc_to_datalog(q, schema)
    pairs = [
        ("trc->diagram", q, d),
        ("diagram->trc", d, diagram_to_trc(d)[0]),
        ("trc->sql", q, sql),
        ("sql->trc", sql, sql_to_trc(sql, schema)[0]),
        ("trc->datalog", q, prog),
        ("datalog->trc", prog, datalog_to_trc(prog, schema)[0]),
    ]
    try:
        plain, _ = datalog_to_ra(prog, schema)
    except TranslationError as exc:
        # a Boolean rule with only negated atoms has no RA* counterpart
        assert "no positive atom" in str(exc)
        return pairs, 1
    anti, _ = datalog_to_ra(prog, schema, use_antijoin=True)
    pairs += [
        ("datalog->ra", prog, plain),
        ("datalog->ra-antijoin", prog, anti),
        ("ra->datalog", plain, ra_to_datalog(plain, schema)[0]),
        ("ra-antijoin->datalog", anti, ra_to_datalog(anti, schema)[0]),
    ]
    return pairs, 0


def test_translation_equivalence():
    start = time.perf_counter()
    checked = skipped = 0
    discrepancies = []
    for f in TRC_FIXTURES:
        pairs, n = translation_pairs(parse("trc", f.text), f.schema)
        skipped += n
        for label, source, target in pairs:
            verdict = equivalent_bounded(source, target, f.schema, EQUIVALENCE_BOUND)
            checked += 1
            if not verdict.equivalent:
                discrepancies.append((f.name, label, verdict.status))
    elapsed = time.perf_counter() - start
    ok = not discrepancies and elapsed < EQUIVALENCE_SECONDS
    detail = f"{checked} pairs, {skipped} RA-inexpressible sentences, discrepancies={discrepancies}, {elapsed:.1f}s"
    report(2, "translation equivalence", ok, detail)
    assert ok


def preservation_chain(q, schema):
    """(label, source, target, trace) along RA* -> Datalog* -> TRC* -> SQL* and Datalog* <-> RA*-antijoin."""
    prog, _ = trc_to_datalog(q, schema)
    steps = []
    try:
        plain, _ = datalog_to_ra(prog, schema)
    except TranslationError:
        start = prog
    else:
        start, tr = ra_to_datalog(plain, schema)
        steps.append(("ra->datalog", plain, start, tr))
        anti, tr = datalog_to_ra(prog, schema, use_antijoin=True)
        steps.append(("datalog->ra-antijoin", prog, anti, tr))
        back, tr = ra_to_datalog(anti, schema)
        steps.append(("ra-antijoin->datalog", anti, back, tr))
    calc, tr = datalog_to_trc(start, schema)
    steps.append(("datalog->trc", start, calc, tr))
    sql, tr = trc_to_sql(calc)
    steps.append(("trc->sql", calc, sql, tr))
    return steps


def test_pattern_preservation():
    start = time.perf_counter()
    checked = 0
    failures = []
    for f in TRC_FIXTURES:
        for label, source, target, tr in preservation_chain(parse("trc", f.text), f.schema):
            checked += 1
            if tr.correspondence is None:
                failures.append((f.name, label, "trace not pattern-preserving"))
                continue
            verdict = pattern_isomorphic(source, target, f.schema, PRESERVATION_BOUND, prefer=tr.correspondence)
            if not verdict.isomorphic:
                failures.append((f.name, label, verdict.status))
            elif verdict.permutation != tr.correspondence:
                failures.append((f.name, label, f"accepted {verdict.permutation}, trace says {tr.correspondence}"))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < PRESERVATION_SECONDS
    report(3, "pattern preservation", ok, f"{checked} translations, failures={failures}, {elapsed:.1f}s")
    assert ok


def _differs_on(q1, q2, schema, permutation, rows) -> bool:
    d1, d2 = dissociate(q1, schema), dissociate(q2, schema)
    inst = {d1.names[i]: frozenset(rows.get(d1.names[i], ())) for i in range(len(d1.names))}
    moved = {d2.names[j]: inst[d1.names[i]] for i, j in enumerate(permutation)}
    a = evaluate(d1.query, Database(d1.schema, inst))
    b = evaluate(d2.query, Database(d2.schema, moved))
    return a.tuples != b.tuples


def test_reference_verdicts():
    problems = []
    # (a) equivalent queries with different patterns
    q1, q2 = parse("datalog", ISO_Q1), parse("datalog", ISO_Q2)
    q3 = parse("trc", FIXTURES["iso_q3"].text)
    v12 = pattern_isomorphic(q1, q2, SINGLE)
    if v12.status != "not-isomorphic" or not v12.equivalence.equivalent:
        problems.append(f"Q1/Q2 {v12.status}")
    for perm, w in v12.witnesses:
        if not _differs_on(q1, q2, SINGLE, perm, dict(w.witness.tuples)):
            problems.append(f"witness for {perm} not re-verified")
    reference = {"R1": {(1, 2)}, "R2": {(1, 3)}}
    for perm in ((0, 1), (1, 0)):
        if not _differs_on(q1, q2, SINGLE, perm, reference):
            problems.append(f"reference witness fails for {perm}")
    if not pattern_isomorphic(q1, q3, SINGLE).isomorphic:
        problems.append("Q1/q3 not isomorphic")

    # (b) relational division splits into two pattern classes
    qs = {k: parse(d, t) for k, (d, t) in DIVISION_QUERIES.items()}
    names = list(qs)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            same = (a in DIVISION_SET1) == (b in DIVISION_SET1)
            v = pattern_isomorphic(qs[a], qs[b], DIVISION)
            if v.isomorphic != same:
                problems.append(f"division {a}/{b}: {v.status}")
            if not same and sorted(map(len, v.signatures)) != [3, 4]:
                problems.append(f"division {a}/{b}: signatures {v.signatures}")
    assert set(DIVISION_SET1) | set(DIVISION_SET2) == set(names)

    # (c) syntactic SQL variants collapse to one canonical TRC per group
    for group, members in SQL_VARIETY.items():
        reference = trc(SQL_VARIETY_TRC[group])
        canon = [sql_to_trc(parse("sql", m), DIVISION)[0] for m in members]
        for m, c in zip(members, canon):
            if not same_up_to_renaming(c, reference):
                problems.append(f"{group}: {m} canonicalizes differently")
            if not equivalent_bounded(canon[0], c, DIVISION).equivalent:
                problems.append(f"{group}: {m} not equivalent")
    report(4, "reference verdicts", not problems, f"problems={problems}")
    assert not problems


def test_similarity_mapping():
    q1 = parse("trc", SIMILAR_PAIR[0])
    q2 = parse("trc", SIMILAR_PAIR[1])
    v = similar_pattern(q1, SAILORS_BOATS, q2, SUPPLIERS)
    relations = v.mapping.relations if v.mapping is not None else None
    ok = v.isomorphic and relations == {"Sailor": "SX", "Reserves": "SPX", "Boat": "PX"}
    report(5, "similar pattern", ok, f"status={v.status}, relations={relations}")
    assert ok


def _table(tid, rel, pid, *attrs):
    return TableNode(tid, rel, pid, tuple(AttributeCell(a) for a in attrs))


INVALID_DIAGRAMS = {
    1: Diagram(
        (
            UnionCell(
                (Partition("p0"), Partition("p1", "p2"), Partition("p2", "p1")),
                (_table("r", "R", "p0", "A", "B"), _table("s", "S", "p1", "B")),
            ),
        )
    ),
    2: Diagram(
        (
            UnionCell(
                (Partition("p0"), Partition("p1", "p0")),
                (_table("r", "R", "p0", "A", "B"), _table("r", "R", "p1", "A", "B")),
            ),
        )
    ),
    3: Diagram(
        (
            UnionCell(
                (Partition("p0"), Partition("p1", "p0")),
                (_table("r", "R", "p0", "A", "B"),),
                (),
                OutputNode("q", (OutputAttr("A", ("r", 0)),)),
            ),
        )
    ),
    4: Diagram(
        (
            UnionCell(
                (Partition("p0"), Partition("p1", "p0"), Partition("p2", "p0")),
                (_table("r", "R", "p0", "A", "B"), _table("s", "S", "p1", "B"), _table("t", "S", "p2", "B")),
                (JoinEdge(("s", 0), ("t", 0)),),
            ),
        )
    ),
    5: Diagram(
        (
            UnionCell(
                (Partition("p0"),),
                (_table("r", "R", "p0", "A", "B"),),
                (),
                OutputNode("q", (OutputAttr("A", ("x", 0)),)),
            ),
        )
    ),
    6: Diagram(
        (
            UnionCell((Partition("p0"),), (_table("r", "R", "p0", "A", "B"),), (), OutputNode("q", (OutputAttr("A", ("r", 0)),))),
            UnionCell((Partition("p0"),), (_table("s", "S", "p0", "B"),), (), OutputNode("q", (OutputAttr("B", ("s", 0)),))),
        ),
        "q",
    ),
}


def produced_diagrams():
    out = [(f.name, trc_to_diagram(parse("trc", f.text))[0], f.schema) for f in TRC_FIXTURES]
    out += [(name, eliminate_disjunction(q, schema), schema) for name, q, schema in disjunctive_inputs()]
    return out


def disjunctive_inputs():
    return [
        ("disjunction-sql", parse("sql", DISJUNCTION_SQL), THREE),
        ("union-trc", parse("trc", UNION_TRC), UNARY),
        ("union-sql", parse("sql", UNION_SQL), UNARY),
        ("red-or-blue", parse("trc", RED_OR_BLUE_TRC), SAILORS),
        ("boolean-or", parse("trc", BOOLEAN_OR_TRC), UNARY),
    ]


def test_validity_suite():
    problems = []
    for cond, d in INVALID_DIAGRAMS.items():
        rep = validate(d, DIVISION)
        if rep.conditions != {cond}:
            problems.append(f"condition {cond} diagram reported {sorted(rep.conditions)}")
    for name, d, schema in produced_diagrams():
        rep = validate(d, schema)
        if not rep.ok:
            problems.append(f"{name}: {[v.message for v in rep.violations]}")
    report(6, "validity suite", not problems, f"problems={problems}")
    assert not problems


def test_completeness_rewrites():
    problems = []
    for name, q, schema in disjunctive_inputs():
        d = eliminate_disjunction(q, schema)
        if not validate(d, schema).ok:
            problems.append(f"{name}: invalid")
        v = equivalent_bounded(q, d, schema)
        if not v.equivalent:
            problems.append(f"{name}: {v.status}")
    d = eliminate_disjunction(parse("trc", UNION_TRC), UNARY)
    if len(d.cells) != 2:
        problems.append(f"union example has {len(d.cells)} cells")
    original = parse("trc", UNION_TRC)
    cells = [compile_query(cell_to_trc(c)[0], UNARY) for c in d.cells]
    rng = random.Random(2024)
    for _ in range(UNION_TRIALS):
        db = random_database(UNARY, rng, 4)
        union = frozenset().union(*(c(db.tuples).tuples for c in cells))
        if union != naive_trc(original, db) or union != evaluate(d, db).tuples:
            problems.append(f"union differs on {db.tuples}")
    report(7, "completeness rewrites", not problems, f"{UNION_TRIALS} random databases, problems={problems}")
    assert not problems


def _inside(outer, inner) -> bool:
    return (
        outer.x < inner.x
        and outer.y < inner.y
        and inner.x + inner.w < outer.x + outer.w
        and inner.y + inner.h < outer.y + outer.h
    )


def test_render_determinism_and_geometry():
    problems = []
    for name, d, _ in produced_diagrams():
        first, second = emit_svg(layout(d)), emit_svg(layout(d))
        if first.encode() != second.encode() or emit_dot(d) != emit_dot(d):
            problems.append(f"{name}: output differs between runs")
        try:
            ET.fromstring(first.encode())
            xml.dom.minidom.parseString(first.encode())
        except ET.ParseError as exc:
            problems.append(f"{name}: malformed SVG {exc}")
        ld = layout(d)
        for c, cell in zip(ld.cells, d.cells):
            for p in c.partitions:
                for other in c.partitions:
                    if p.id != other.id and (p.id in cell.ancestors(other.id)) != _inside(p.rect, other.rect):
                        problems.append(f"{name}: containment of {other.id} in {p.id}")
            for t in c.tables:
                if not t.output and not _inside(c.partition(t.partition).rect, t.rect):
                    problems.append(f"{name}: table {t.id} outside its partition")
    report(8, "render determinism and geometry", not problems, f"problems={problems}")
    assert not problems


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s"]))
