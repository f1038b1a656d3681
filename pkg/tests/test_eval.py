import random

import pytest
from hypothesis import given, settings, strategies as st

from fixtures import DIVISION, DIVISION_QUERIES, SAILORS, TRC_FIXTURES, UNARY
from oracles import naive_trc, random_database
from reldiag.catalog import Database, Schema
from reldiag.errors import FragmentError, SchemaError, SortError
from reldiag.eval import compile_query, evaluate, evaluate_trc_by_candidates, ra_columns
from reldiag.parse import parse
from reldiag.translate import eliminate_disjunction
from strategies import SCHEMA, trc_queries

# A=1 is paired with every S.B; A=2 misses B=2.
DIVISION_DB = Database.of(DIVISION, {"R": [(1, 1), (1, 2), (2, 1)], "S": [(1,), (2,)]})


@pytest.mark.parametrize("name", sorted(DIVISION_QUERIES))
def test_division_in_every_dialect(name):
    dialect, text = DIVISION_QUERIES[name]
    assert evaluate(parse(dialect, text), DIVISION_DB).tuples == {(1,)}


@pytest.mark.parametrize("name", sorted(DIVISION_QUERIES))
def test_division_with_empty_divisor(name):
    dialect, text = DIVISION_QUERIES[name]
    db = DIVISION_DB.with_rows("S", [])
    assert evaluate(parse(dialect, text), db).tuples == {(1,), (2,)}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TRC_FIXTURES), st.integers(0, 10_000))
def test_fixtures_agree_with_naive_semantics(fixture, seed):
    q = parse("trc", fixture.text)
    db = random_database(fixture.schema, random.Random(seed), 3)
    assert evaluate(q, db).tuples == naive_trc(q, db)


@settings(max_examples=150, deadline=None)
@given(trc_queries(), st.integers(0, 10_000))
def test_generated_queries_agree_with_naive_semantics(q, seed):
    db = random_database(SCHEMA, random.Random(seed), 3)
    expected = naive_trc(q, db)
    assert evaluate(q, db).tuples == expected
    assert evaluate_trc_by_candidates(q, SCHEMA, db.tuples).tuples == expected


def test_boolean_answers():
    q = parse("trc", "exists r in R [r.A = 1]")
    db = Database.of(UNARY, {"R": [(1,)]})
    result = evaluate(q, db)
    assert result.is_boolean and result.truth and result.to_text() == "true"
    assert not evaluate(q, Database.empty(UNARY)).truth
    assert evaluate(parse("sql", "SELECT NOT (EXISTS (SELECT * FROM R))"), Database.empty(UNARY)).truth


def test_string_values_and_text_output():
    db = Database.of(SAILORS, {"Sailor": [(1, "ann"), (2, "bo")], "Reserves": [(1, 7)], "Boat": [(7, "red")]})
    q = parse("sql", "SELECT S.sname FROM Sailor S, Reserves R, Boat B WHERE S.sid = R.sid AND R.bid = B.bid AND B.color = 'red'")
    result = evaluate(q, db)
    assert result.tuples == {("ann",)}
    assert result.to_text() == 'sname\n"ann"'


def test_datalog_repeated_variable_in_one_atom():
    schema = Schema.parse("R(A,B)")
    db = Database.of(schema, {"R": [(1, 2), (3, 3)]})
    assert evaluate(parse("datalog", "Q(a) :- R(a, a)."), db).tuples == {(3,)}
    assert evaluate(parse("datalog", "Q(a) :- R(a, b), R(b, a)."), db).tuples == {(3,)}


def test_ra_operators():
    schema = Schema.parse("R(A,B); S(B)")
    db = Database.of(schema, {"R": [(1, 1), (2, 3)], "S": [(1,), (2,)]})
    def run(text):
        return evaluate(parse("ra", text), db).tuples

    assert run("join(R, S)") == {(1, 1)}
    assert run("antijoin(R, S)") == {(2, 3)}
    assert run("project[A](select[R.B > 1](R))") == {(2,)}
    assert run("join[R.B < S.B](R, S)") == {(1, 1, 2)}
    assert run("minus(project[B](R), S)") == {(3,)}
    assert run("union(project[B](R), S)") == {(1,), (2,), (3,)}
    assert [c.name for c in ra_columns(parse("ra", "times(R, rename[T](S))"), schema)] == ["A", "B", "B"]


def test_sort_errors():
    with pytest.raises(SortError):
        compile_query(parse("trc", "exists r in R [r.A = 'x']"), UNARY)
    with pytest.raises(SortError):
        compile_query(parse("sql", "SELECT S.sname FROM Sailor S WHERE S.sid = S.sname"), SAILORS)
    with pytest.raises(SortError):
        compile_query(parse("datalog", "Q(x) :- Sailor(x, _), Boat(_, x)."), SAILORS)


def test_schema_errors():
    with pytest.raises(SchemaError):
        compile_query(parse("trc", "exists t in T"), UNARY)
    with pytest.raises(SchemaError):
        compile_query(parse("ra", "project[C](R)"), UNARY)
    with pytest.raises((SchemaError, FragmentError)):
        compile_query(parse("datalog", "Q(x) :- R(x, y)."), UNARY)


def test_unsafe_datalog_rule():
    with pytest.raises(FragmentError):
        compile_query(parse("datalog", "Q(x) :- R(y), not S(x)."), UNARY)


def test_diagram_evaluates_as_union():
    d = eliminate_disjunction(parse("trc", "{q(A) | exists r in R [q.A = r.A] or exists s in S [q.A = s.A]}"), UNARY)
    db = Database.of(UNARY, {"R": [(1,)], "S": [(2,)]})
    assert evaluate(d, db).tuples == {(1,), (2,)}
