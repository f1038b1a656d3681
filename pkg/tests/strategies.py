"""Hypothesis strategies for random guarded, canonical TRC queries over ``R(A,B); S(B)``."""

from __future__ import annotations

from hypothesis import strategies as st

from reldiag.ast.common import Const
from reldiag.ast.trc import AttrRef, Negation, Output, OutputColumn, Predicate, Quantifier, Scope, TrcQuery
from reldiag.catalog import Schema

SCHEMA = Schema.parse("R(A,B); S(B)")
OPS = ("=", "!=", "<", "<=", ">", ">=")


@st.composite
def _scope(draw, depth: int, outer: list[AttrRef], counter: list[int]) -> Scope:
    quants = []
    local: list[AttrRef] = []
    for rel in draw(st.lists(st.sampled_from(SCHEMA.names), min_size=1, max_size=2)):
        counter[0] += 1
        var = f"t{counter[0]}"
        quants.append(Quantifier(var, rel))
        local += [AttrRef(var, a) for a in SCHEMA.relation(rel).attribute_names]
    preds = []
    for _ in range(draw(st.integers(0, 2))):
        left = draw(st.sampled_from(local))
        right = draw(st.one_of(st.sampled_from(local + outer), st.integers(0, 1).map(Const)))
        op = draw(st.sampled_from(OPS))
        if right == left or any({(p.left, p.right), (p.right, p.left)} & {(left, right)} for p in preds):
            continue
        preds.append(Predicate(left, op, right))
    kids = []
    if depth < 2:
        for _ in range(draw(st.integers(0, 2))):
            kids.append(Negation(draw(_scope(depth + 1, outer + local, counter))))
    return Scope(tuple(quants), tuple(preds) + tuple(kids))


@st.composite
def trc_queries(draw) -> TrcQuery:
    body = draw(_scope(0, [], [0]))
    if draw(st.booleans()):
        return TrcQuery(None, body)
    refs = [AttrRef(x.var, a) for x in body.quantified for a in SCHEMA.relation(x.relation).attribute_names]
    source = draw(st.sampled_from(refs))
    return TrcQuery(Output("q", (OutputColumn("A", source),)), body)
