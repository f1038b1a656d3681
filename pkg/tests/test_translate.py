import pytest
from hypothesis import given, settings

from fixtures import (
    BOOLEAN_OR_TRC,
    DIVISION,
    DIVISION_QUERIES,
    FIXTURES,
    RED_OR_BLUE_TRC,
    SAILORS,
    TRC_FIXTURES,
    UNARY,
    UNION_SQL,
    UNION_TRC,
)
from reldiag.errors import TranslationError
from reldiag.eval import Bound, equivalent_bounded
from reldiag.parse import parse, print_query
from reldiag.translate import (
    MAX_DISJUNCTS,
    TraceStep,
    TranslationTrace,
    compose,
    datalog_to_ra,
    datalog_to_trc,
    diagram_to_trc,
    disjunction_free,
    eliminate_disjunction,
    ra_to_datalog,
    sql_to_trc,
    trc_to_datalog,
    trc_to_diagram,
    trc_to_sql,
)
from strategies import SCHEMA, trc_queries

SMALL = Bound(domain_size=2, trials=20, random_size=3, seed=5)


def query(name):
    return parse(*DIVISION_QUERIES[name])


def test_ra_to_datalog_division():
    p, trace = ra_to_datalog(query("ra"), DIVISION)
    assert print_query(p) == "I1(a) :- R(a, _), S(b), not R(a, b).\nQ(a) :- R(a, _), not I1(a)."
    assert trace.correspondence == (3, 0, 1, 2)
    assert (trace.source, trace.target) == ("ra", "datalog")


def test_datalog_to_ra_division():
    p, _ = ra_to_datalog(query("ra"), DIVISION)
    e, trace = datalog_to_ra(p, DIVISION)
    assert print_query(e) == "minus(project[A](R), project[A](minus(times(project[A](R), S), R)))"
    assert trace.correspondence == (1, 2, 3, 0)
    e, trace = datalog_to_ra(p, DIVISION, use_antijoin=True)
    assert print_query(e) == "antijoin(project[A](R), project[A](antijoin(times(project[A](R), S), R)))"
    assert trace.correspondence == (1, 2, 3, 0)


def test_trc_to_sql_division():
    s, trace = trc_to_sql(parse("trc", FIXTURES["division1"].text))
    assert print_query(s) == (
        "SELECT DISTINCT R.A FROM R WHERE NOT EXISTS (SELECT * FROM S WHERE NOT EXISTS "
        "(SELECT * FROM R AS r2 WHERE r2.B = S.B AND r2.A = R.A))"
    )
    assert trace.correspondence == (0, 1, 2)


def test_sql_and_diagram_round_trip_keep_correspondence():
    q = parse("trc", FIXTURES["division2"].text)
    d, trace = trc_to_diagram(q)
    assert trace.correspondence == (0, 1, 2, 3)
    back, trace = diagram_to_trc(d)
    assert trace.correspondence == (0, 1, 2, 3)
    assert equivalent_bounded(q, back, DIVISION).equivalent
    q2, trace = sql_to_trc(query("sql_c"), DIVISION)
    assert trace.correspondence == (0, 1, 2, 3)
    assert equivalent_bounded(q2, query("sql_c"), DIVISION).equivalent


def test_datalog_to_trc_division():
    q, trace = datalog_to_trc(query("datalog"), DIVISION)
    assert trace.pattern_preserving
    assert equivalent_bounded(q, query("datalog"), DIVISION).equivalent


def test_trc_to_datalog_adds_guard_atoms():
    p, trace = trc_to_datalog(parse("trc", FIXTURES["division1"].text), DIVISION)
    assert trace.correspondence is None and not trace.pattern_preserving
    assert equivalent_bounded(p, query("trc1"), DIVISION).equivalent


def test_union_is_rejected_by_ra_to_datalog():
    with pytest.raises(TranslationError, match="union"):
        ra_to_datalog(parse("ra", "union(R, S)"), UNARY)


def test_boolean_rule_without_positive_atom_has_no_ra_form():
    with pytest.raises(TranslationError, match="no positive atom"):
        datalog_to_ra(parse("datalog", "Q() :- not R(1)."), UNARY)


def test_disjunction_is_rejected_by_direct_translations():
    with pytest.raises(TranslationError):
        trc_to_diagram(parse("trc", UNION_TRC))
    with pytest.raises(TranslationError):
        trc_to_sql(parse("trc", UNION_TRC))
    with pytest.raises(TranslationError):
        sql_to_trc(parse("sql", UNION_SQL), UNARY)


def test_disjunctive_normal_form_limit():
    assert MAX_DISJUNCTS == 64
    big = " and ".join(f"(exists r{i} in R [r{i}.A = 0] or exists s{i} in S [s{i}.A = 0])" for i in range(7))
    with pytest.raises(TranslationError, match="128 disjuncts"):
        eliminate_disjunction(parse("trc", big), UNARY)


@pytest.mark.parametrize(
    "text,schema,cells",
    [(UNION_TRC, UNARY, 2), (RED_OR_BLUE_TRC, SAILORS, 2), (BOOLEAN_OR_TRC, UNARY, 1)],
)
def test_eliminate_disjunction_cell_counts(text, schema, cells):
    q = parse("trc", text)
    d = eliminate_disjunction(q, schema)
    assert len(d.cells) == cells
    assert equivalent_bounded(q, d, schema).equivalent


def test_union_sql_splits_into_branches():
    parts = disjunction_free(parse("sql", UNION_SQL), UNARY)
    assert sorted(q.body.quantified[0].relation for q in parts) == ["R", "S"]


def test_compose_chains_correspondences():
    a = TranslationTrace("x", "y", (TraceStep(1, "one"),), (1, 0, 2))
    b = TranslationTrace("y", "z", (TraceStep(1, "two"),), (2, 0, 1))
    c = compose(a, b)
    assert c.correspondence == (0, 2, 1)
    assert [s.number for s in c.steps] == [1, 2] and (c.source, c.target) == ("x", "z")
    assert compose(a, TranslationTrace("y", "z")).correspondence is None
    with pytest.raises(ValueError):
        TranslationTrace("x", "y", correspondence=(0, 0))


@pytest.mark.parametrize("fixture", TRC_FIXTURES, ids=lambda f: f.name)
def test_fixture_translations_are_equivalent(fixture):
    q = parse("trc", fixture.text)
    d, _ = trc_to_diagram(q)
    s, _ = trc_to_sql(q)
    p, _ = trc_to_datalog(q, fixture.schema)
    for target in (d, s, p):
        assert equivalent_bounded(q, target, fixture.schema, SMALL).equivalent


@settings(max_examples=60, deadline=None)
@given(trc_queries())
def test_generated_translations_are_equivalent(q):
    d, _ = trc_to_diagram(q)
    back, _ = diagram_to_trc(d)
    s, _ = trc_to_sql(q)
    p, _ = trc_to_datalog(q, SCHEMA)
    for target in (back, s, p):
        assert equivalent_bounded(q, target, SCHEMA, SMALL).status != "not-equivalent"
