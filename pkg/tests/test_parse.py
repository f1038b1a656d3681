import pytest
from hypothesis import given, settings

from fixtures import DISJUNCTION_SQL, DIVISION_QUERIES, SQL_VARIETY, TRC_FIXTURES, UNION_SQL, UNION_TRC
from reldiag.ast import datalog as dl
from reldiag.ast import ra
from reldiag.ast.trc import Disjunction, Negation
from reldiag.errors import ParseError
from reldiag.parse import EXTENSIONS, parse, print_query
from strategies import trc_queries

CORPUS = (
    [("trc", f.text) for f in TRC_FIXTURES]
    + list(DIVISION_QUERIES.values())
    + [("sql", m) for group in SQL_VARIETY.values() for m in group]
    + [("sql", DISJUNCTION_SQL), ("sql", UNION_SQL), ("trc", UNION_TRC)]
    + [
        ("datalog", "Q(x, 'red') :- R(x, y), y >= 2, not S(y). S2(z) :- S(z)."),
        ("ra", "rename[R.A -> C](select[A != 'x'](R))"),
        ("ra", "join[R.B < S.B](R, S as T)"),
        ("ra", "union(project[A](R), rename[R](S))"),
        ("sql", "SELECT NOT (EXISTS (SELECT * FROM R WHERE R.A = 1))"),
        ("sql", "select r.a from R r where r.b <= some (select s.b from S s) -- trailing comment"),
    ]
)


@pytest.mark.parametrize("dialect,text", CORPUS)
def test_print_parse_round_trip(dialect, text):
    q = parse(dialect, text)
    printed = print_query(q)
    again = parse(dialect, printed)
    assert again == q
    assert print_query(again) == printed


@settings(max_examples=150, deadline=None)
@given(trc_queries())
def test_generated_trc_round_trip(q):
    assert parse("trc", print_query(q)) == q


def test_spans_point_into_source():
    text = "{q(A) | exists r in R [q.A = r.A and\n  not (exists s in S [s.B = r.B])]}"
    q = parse("trc", text)
    neg = next(c for c in q.body.conjuncts if isinstance(c, Negation))
    inner = neg.scope.quantified[0]
    assert inner.span.line == 2
    assert text[inner.span.start:inner.span.end].startswith("s in S")


@pytest.mark.parametrize(
    "dialect,text,line,column",
    [
        ("trc", "{q(A) | exists r in R [q.A = ]}", 1, 30),
        ("trc", "exists r in R [r.A = 1", 1, 23),
        ("sql", "SELECT R.A FROM", 1, 16),
        ("sql", "SELECT R.A FROM R\nWHERE R.A = = 1", 2, 13),
        ("datalog", "Q(x) :- R(x)", 1, 13),
        ("ra", "project[A](R", 1, 13),
    ],
)
def test_parse_errors_carry_positions(dialect, text, line, column):
    with pytest.raises(ParseError) as info:
        parse(dialect, text)
    assert (info.value.span.line, info.value.span.column) == (line, column)


def test_unknown_dialect():
    with pytest.raises(ValueError):
        parse("cypher", "MATCH (n)")


def test_trc_disjunction_is_kept():
    q = parse("trc", UNION_TRC)
    assert isinstance(q.body.conjuncts[0], Disjunction)


def test_datalog_anonymous_variables_are_fresh():
    p = parse("datalog", "Q(x) :- R(x, _), R(_, x).")
    (rule,) = p.rules
    a, b = rule.positive()
    assert a.terms[1] != b.terms[0]
    assert print_query(p) == "Q(x) :- R(x, _), R(_, x)."
    assert [x.predicate for x in dl.edb_atoms(p)] == ["R", "R"]


def test_ra_leaves_in_order():
    e = parse("ra", DIVISION_QUERIES["ra"][1])
    assert [n.name for n in ra.leaves(e)] == ["R", "R", "S", "R"]


def test_extensions():
    assert EXTENSIONS[".dl"] == "datalog"
    assert set(EXTENSIONS.values()) == {"trc", "sql", "datalog", "ra"}
