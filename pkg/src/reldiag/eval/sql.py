"""Direct evaluation of the nested SELECT fragment (set semantics).

Column references are resolved once at compile time against the FROM items
of the enclosing blocks (innermost first); every FROM item owns a slot in a
flat environment, so correlated subqueries see the outer tuples.
"""

from __future__ import annotations

from typing import Callable

from ..ast.common import Const
from ..ast.sql import (
    BooleanSelect,
    ColumnRef,
    Comparison,
    ExistsCond,
    InCond,
    NotGroup,
    OrCond,
    QuantifiedCond,
    Select,
    Union_,
)
from ..catalog import Schema, sort_of
from ..errors import SchemaError
from .common import OPERATOR_FN, Instance, ResultRelation, check_sorts

Check = Callable[[list, Instance], bool]


class _Frame:
    """FROM items visible in one SELECT block: name -> (slot, relation schema)."""

    def __init__(self, items: dict, parent: _Frame | None):
        self.items = items
        self.parent = parent


class _Compiler:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.slots = 0

    def resolve(self, col: ColumnRef, frame: _Frame | None) -> tuple[int, int, str]:
        f = frame
        while f is not None:
            if col.table is not None:
                if col.table in f.items:
                    slot, rel = f.items[col.table]
                    return slot, rel.index(col.attr), rel.sort(col.attr)
            else:
                hits = [(slot, rel) for slot, rel in f.items.values() if col.attr in rel.attribute_names]
                if len(hits) > 1:
                    raise SchemaError(f"ambiguous column {col.attr}")
                if hits:
                    slot, rel = hits[0]
                    return slot, rel.index(col.attr), rel.sort(col.attr)
            f = f.parent
        raise SchemaError(f"unknown column {col}")

    def select(self, s: Select, parent: _Frame | None):
        """Compile a block; returns (columns, enumerate(env, db) -> iterator of row tuples)."""
        items = {}
        order = []
        for t in s.from_:
            rel = self.schema.relation(t.relation)
            slot = self.slots
            self.slots += 1
            items[t.name] = (slot, rel)
            order.append((slot, t.relation))
        frame = _Frame(items, parent)
        local = {slot: i + 1 for i, (slot, _) in enumerate(order)}
        levels: list[list[Check]] = [[] for _ in range(len(order) + 1)]
        for c in s.where:
            check, used = self.condition(c, frame)
            level = max((local.get(x, 0) for x in used), default=0)
            if not isinstance(c, Comparison):
                level = len(order)
            levels[level].append(check)
        if s.columns is None:
            getters = [(slot, i) for slot, rel in (items[t.name] for t in s.from_) for i in range(rel.arity)]
            names = tuple(a for t in s.from_ for a in items[t.name][1].attribute_names)
        else:
            getters = []
            for col in s.columns:
                slot, idx, _ = self.resolve(col, frame)
                getters.append((slot, idx))
            names = tuple(col.attr for col in s.columns)
        pre, per_level = levels[0], levels[1:]

        def solutions(env: list, db: Instance):
            if not all(c(env, db) for c in pre):
                return

            def go(i: int):
                if i == len(order):
                    yield tuple(env[sl][ix] for sl, ix in getters)
                    return
                slot, rel = order[i]
                checks = per_level[i]
                for t in db[rel]:
                    env[slot] = t
                    if all(c(env, db) for c in checks):
                        yield from go(i + 1)

            yield from go(0)

        sorts = [self.resolve_sort(slot, idx, frame) for slot, idx in getters]
        return names, sorts, solutions

    def resolve_sort(self, slot: int, idx: int, frame: _Frame) -> str:
        f = frame
        while f is not None:
            for s, rel in f.items.values():
                if s == slot:
                    return rel.sorts[idx]
            f = f.parent
        raise SchemaError("internal: unresolved slot")

    def operand(self, o, frame):
        if isinstance(o, Const):
            return None, o.value, sort_of(o.value), set()
        slot, idx, sort = self.resolve(o, frame)
        return slot, idx, sort, {slot}

    def condition(self, c, frame: _Frame) -> tuple[Check, set]:
        if isinstance(c, Comparison):
            ls, li, lsort, lu = self.operand(c.left, frame)
            rs, ri, rsort, ru = self.operand(c.right, frame)
            check_sorts(lsort, rsort, f"comparison {c.left} {c.op} {c.right}")
            fn = OPERATOR_FN[c.op]
            if rs is None:
                return (lambda env, db: fn(env[ls][li], ri)), lu
            return (lambda env, db: fn(env[ls][li], env[rs][ri])), lu | ru
        if isinstance(c, NotGroup):
            parts = [self.condition(x, frame)[0] for x in c.conditions]
            return (lambda env, db: not all(p(env, db) for p in parts)), set()
        if isinstance(c, OrCond):
            branches = [[self.condition(x, frame)[0] for x in b] for b in c.branches]
            return (lambda env, db: any(all(p(env, db) for p in b) for b in branches)), set()
        if isinstance(c, ExistsCond):
            _, _, sols = self.select(c.query, frame)
            if c.negated:
                return (lambda env, db: next(sols(env, db), None) is None), set()
            return (lambda env, db: next(sols(env, db), None) is not None), set()
        if isinstance(c, InCond):
            _, sub_sorts, sols = self.select(c.query, frame)
            if len(sub_sorts) != len(c.columns):
                raise SchemaError("IN compares tuples of different arity")
            getters = []
            for col, sort in zip(c.columns, sub_sorts):
                slot, idx, csort = self.resolve(col, frame)
                check_sorts(csort, sort, f"membership of {col}")
                getters.append((slot, idx))
            negated = c.negated

            def member(env, db):
                probe = tuple(env[s][i] for s, i in getters)
                found = any(row == probe for row in sols(env, db))
                return found != negated

            return member, set()
        if isinstance(c, QuantifiedCond):
            _, sub_sorts, sols = self.select(c.query, frame)
            if len(sub_sorts) != 1:
                raise SchemaError(f"{c.quantifier.upper()} subquery must return one column")
            slot, idx, csort = self.resolve(c.column, frame)
            check_sorts(csort, sub_sorts[0], f"quantified comparison on {c.column}")
            fn = OPERATOR_FN[c.op]
            if c.quantifier.lower() == "all":
                return (lambda env, db: all(fn(env[slot][idx], r[0]) for r in sols(env, db))), set()
            return (lambda env, db: any(fn(env[slot][idx], r[0]) for r in sols(env, db))), set()
        raise TypeError(f"unknown condition {type(c).__name__}")


def compile_sql(q, schema: Schema) -> Callable[[Instance], ResultRelation]:
    """Type-check ``q`` against ``schema`` and return an evaluator over instances."""
    comp = _Compiler(schema)
    if isinstance(q, Union_):
        parts = [compile_sql(p, schema) for p in q.queries]

        def run_union(db: Instance) -> ResultRelation:
            results = [p(db) for p in parts]
            arities = {len(r.attributes) for r in results}
            if len(arities) != 1:
                raise SchemaError("UNION operands have different arities")
            rows = frozenset().union(*(r.tuples for r in results))
            return ResultRelation(results[0].attributes, rows)

        return run_union
    if isinstance(q, BooleanSelect):
        if q.kind == "not":
            parts = [comp.condition(c, None)[0] for c in q.conditions]
            size = comp.slots
            truth_fn = lambda env, db: not all(p(env, db) for p in parts)
        else:
            _, _, sols = comp.select(q.query, None)
            size = comp.slots
            negated = q.kind == "not exists"
            truth_fn = lambda env, db: (next(sols(env, db), None) is None) == negated

        def run_boolean(db: Instance) -> ResultRelation:
            truth = truth_fn([None] * size, db)
            return ResultRelation((), frozenset({()}) if truth else frozenset())

        return run_boolean
    names, _, sols = comp.select(q, None)
    size = comp.slots

    def run(db: Instance) -> ResultRelation:
        return ResultRelation(names, frozenset(sols([None] * size, db)))

    return run
