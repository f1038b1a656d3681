import itertools

import pytest
from hypothesis import given, settings

from fixtures import DIVISION, FIXTURES, UNARY
from oracles import naive_trc
from reldiag.ast import canonicalize_trc
from reldiag.catalog import Database, Schema
from reldiag.errors import SchemaError
from reldiag.eval import Bound, equivalent_bounded, evaluate
from reldiag.eval.oracle import DatabaseSpace, domain
from reldiag.parse import parse
from strategies import SCHEMA, trc_queries

SMALL = Bound(domain_size=2, trials=20, random_size=3, seed=7)


def trc(name):
    return parse("trc", FIXTURES[name].text)


def test_bound_validation():
    with pytest.raises(ValueError):
        Bound(domain_size=0)
    with pytest.raises(ValueError):
        Bound(trials=-1)
    assert Bound().to_dict()["max_databases"] == 1 << 18


def test_domain_fills_around_constants():
    assert domain("int", [], 2) == [0, 1]
    assert domain("int", [5], 2) == [5, 6]
    assert domain("str", ["red"], 3) == ["a", "b", "red"]


def test_exhaustive_space_matches_brute_force():
    # Unary R and S over {0, 1}: every pair of subsets.
    space = DatabaseSpace(UNARY, [], Bound(domain_size=2, trials=0))
    seen = list(space.exhaustive())
    subsets = [frozenset(c) for k in range(3) for c in itertools.combinations([(0,), (1,)], k)]
    expected = [{"R": r, "S": s} for r in subsets for s in subsets]
    assert len(seen) == 16
    assert sorted(map(repr, seen)) == sorted(map(repr, expected))


def test_division_against_union_has_a_witness():
    v = equivalent_bounded(trc("division1"), trc("union_cell_r"), DIVISION)
    assert v.refuted and v.tier == "exhaustive"
    assert v.witness["R"] == {(0, 0)} and v.witness["S"] == {(1,)}
    assert v.left.tuples == set() and v.right.tuples == {(0,)}
    assert v.difference == (0,)
    assert evaluate(trc("division1"), v.witness).tuples != evaluate(trc("union_cell_r"), v.witness).tuples


def test_cross_dialect_refutation():
    v = equivalent_bounded(parse("sql", "SELECT R.A FROM R"), parse("trc", "{q(A) | exists s in S [q.A = s.A]}"), UNARY)
    assert v.refuted
    assert v.witness["R"] == frozenset() and v.witness["S"] == {(0,)}


def test_inconclusive_when_constants_exceed_domain():
    q = parse("trc", "exists r in R [r.A = 1 or r.A = 2 or r.A = 3]")
    v = equivalent_bounded(q, q, UNARY)
    assert v.status == "inconclusive"
    assert "cannot hold" in v.reason
    assert equivalent_bounded(q, q, UNARY, Bound(domain_size=3)).equivalent


def test_guarded_rewrite_is_equivalent():
    assert equivalent_bounded(trc("limits_q3"), trc("limits_q3_guarded"), UNARY).equivalent


def test_arity_mismatch_is_an_error():
    with pytest.raises(SchemaError):
        equivalent_bounded(parse("ra", "R"), parse("ra", "project[A](R)"), DIVISION)


def test_verdicts_are_deterministic():
    a = equivalent_bounded(trc("division1"), trc("division2"), DIVISION, SMALL)
    b = equivalent_bounded(trc("division1"), trc("division2"), DIVISION, SMALL)
    assert a == b and a.equivalent
    assert a.to_dict() == b.to_dict()


def test_random_tier_finds_difference_beyond_exhaustive_domain():
    # Differs only once R holds three distinct values.
    q1 = parse("trc", "exists r in R, s in R, t in R [r.A < s.A and s.A < t.A]")
    q2 = parse("trc", "exists r in R [r.A < r.A]")
    v = equivalent_bounded(q1, q2, UNARY, Bound(domain_size=2, trials=200, random_size=4, seed=3))
    assert v.refuted and v.tier == "random"
    assert len(v.witness["R"]) >= 3


@settings(max_examples=40, deadline=None)
@given(trc_queries(), trc_queries())
def test_witnesses_are_real(q1, q2):
    if bool(q1.output) != bool(q2.output):
        return
    v = equivalent_bounded(q1, q2, SCHEMA, SMALL)
    if v.refuted:
        assert naive_trc(q1, v.witness) != naive_trc(q2, v.witness)


@settings(max_examples=40, deadline=None)
@given(trc_queries())
def test_canonical_form_is_equivalent(q):
    assert equivalent_bounded(q, canonicalize_trc(q), SCHEMA, SMALL).status != "not-equivalent"


def test_unused_relations_stay_empty_in_witness():
    schema = Schema.parse("R(A); S(A); T(A)")
    v = equivalent_bounded(parse("ra", "R"), parse("ra", "S"), schema)
    assert v.refuted and v.witness["T"] == frozenset()
    assert isinstance(v.witness, Database)
