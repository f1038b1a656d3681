import pytest
from hypothesis import given, settings

from fixtures import DIVISION, DIVISION_QUERIES, DIVISION_SET1, ISO_Q1, ISO_Q2, SQL_VARIETY, THREE, UNARY
from reldiag.catalog import Schema
from reldiag.eval import Bound, equivalent_bounded
from reldiag.parse import parse, print_query
from reldiag.pattern import check_permutation, dissociate, pattern_isomorphic, signature, similar_pattern
from reldiag.translate import trc_to_diagram, trc_to_sql
from strategies import SCHEMA, trc_queries

# Dissociation multiplies relations, so the exhaustive tier is capped low here.
SMALL = Bound(domain_size=2, trials=20, random_size=3, seed=11, max_databases=1 << 10)


def query(name):
    return parse(*DIVISION_QUERIES[name])


def test_signature_order_and_spans():
    sig = signature(query("sql_a"))
    assert [e.relation for e in sig] == ["R", "S", "R"]
    assert [(e.span.line, e.span.column) for e in sig] == [(1, 26), (1, 60), (1, 94)]
    assert [e.relation for e in signature(query("ra"))] == ["R", "R", "S", "R"]


def test_signature_of_diagram_uses_table_ids():
    d, _ = trc_to_diagram(query("trc1"))
    assert [e.to_dict() for e in signature(d)] == [
        {"relation": t.relation, "table": t.id} for t in d.cells[0].tables
    ]


def test_dissociate_datalog_division():
    d = dissociate(query("datalog"), DIVISION)
    assert d.names == ("R1", "S2", "R3", "R4")
    assert d.original == ("R", "S", "R", "R")
    assert print_query(d.query) == "I(x) :- R1(x, _), S2(y), not R3(x, y).\nQ(x) :- R4(x, _), not I(x)."
    assert d.schema.relation("S2").attribute_names == ("B",)


def test_dissociate_avoids_existing_names():
    schema = Schema.parse("R(A); R1(A)")
    d = dissociate(parse("trc", "exists r in R, s in R1 [r.A = s.A]"), schema)
    assert d.names == ("R_1", "R12")


def test_division_set1_is_pattern_isomorphic():
    base = query(DIVISION_SET1[0])
    for name in DIVISION_SET1[1:]:
        assert pattern_isomorphic(base, query(name), DIVISION).isomorphic, name


def test_reference_counts_must_match():
    v = pattern_isomorphic(query("trc1"), query("trc2"), DIVISION)
    assert v.status == "not-isomorphic"
    assert "3 and 4" in v.reason


def test_equivalent_but_not_isomorphic():
    schema = Schema.parse("R(A,B)")
    q1, q2 = parse("datalog", ISO_Q1), parse("datalog", ISO_Q2)
    assert equivalent_bounded(q1, q2, schema).equivalent
    v = pattern_isomorphic(q1, q2, schema)
    assert v.status == "not-isomorphic"
    assert len(v.witnesses) == 2 and all(w.refuted for _, w in v.witnesses)


def test_check_permutation_one_pairing():
    a, b = query("trc2"), query("ra")
    assert check_permutation(a, b, DIVISION, (0, 2, 1, 3)).equivalent
    assert check_permutation(a, b, DIVISION, (0, 2, 3, 1)).refuted
    with pytest.raises(ValueError):
        check_permutation(a, b, DIVISION, (0, 1, 2, 3))
    with pytest.raises(ValueError):
        check_permutation(a, b, DIVISION, (0, 2, 1))


def test_prefer_is_validated_and_reported():
    a, b = query("trc2"), query("ra")
    assert pattern_isomorphic(a, b, DIVISION, prefer=(0, 2, 1, 3)).permutation == (0, 2, 1, 3)
    with pytest.raises(ValueError):
        pattern_isomorphic(a, b, DIVISION, prefer=(1, 0, 2, 3))


def test_sql_variety_groups_differ():
    join, antijoin = (parse("sql", SQL_VARIETY[k][0]) for k in ("join", "antijoin"))
    assert not pattern_isomorphic(join, antijoin, THREE).isomorphic


def test_similar_pattern_finds_mapping():
    v = similar_pattern(
        parse("trc", "{q(A) | exists r in R [q.A = r.A]}"), UNARY, parse("trc", "{q(A) | exists s in S [q.A = s.A]}"), UNARY
    )
    assert v.isomorphic
    assert v.mapping.to_dict()["relations"] == {"R": "S"}


def test_similar_pattern_without_compatible_mapping():
    v = similar_pattern(
        parse("trc", "{q(A) | exists r in R [q.A = r.A]}"),
        UNARY,
        parse("trc", "{q(C) | exists t in T [q.C = t.C]}"),
        Schema.parse("T(C:str)"),
    )
    assert v.status == "not-isomorphic"
    assert v.reason == "no arity- and sort-compatible schema mapping exists"


@settings(max_examples=30, deadline=None)
@given(trc_queries())
def test_translations_of_generated_queries_keep_their_pattern(q):
    s, trace = trc_to_sql(q)
    v = pattern_isomorphic(q, s, SCHEMA, SMALL, prefer=trace.correspondence)
    assert v.status != "not-isomorphic"
    if v.isomorphic:
        assert v.permutation == trace.correspondence
