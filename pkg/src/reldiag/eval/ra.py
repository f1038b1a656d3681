"""Evaluation of relational algebra in the named perspective.

A column is identified by ``(qualifier, name)``. Natural joins and antijoins
match on shared unqualified names; difference and union align the right
operand by name when both sides carry the same duplicate-free set of names,
and positionally otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..ast.common import Const
from ..ast.ra import (
    Antijoin,
    ColRef,
    Join,
    Minus,
    OrCondition,
    Product,
    Project,
    Relation,
    Rename,
    Select,
    Union_,
)
from ..catalog import Schema, sort_of
from ..errors import SchemaError
from .common import OPERATOR_FN, Instance, ResultRelation, check_sorts


@dataclass(frozen=True)
class Column:
    qualifier: str
    name: str
    sort: str


Rows = Callable[[Instance], frozenset]


def find_column(cols: list[Column], ref: ColRef) -> int:
    hits = [i for i, c in enumerate(cols) if c.name == ref.name and ref.qualifier in (None, c.qualifier)]
    if not hits:
        raise SchemaError(f"unknown column {ref}")
    if len(hits) > 1:
        raise SchemaError(f"ambiguous column {ref}")
    return hits[0]


def no_duplicates(cols: list[Column], where: str) -> None:
    keys = [(c.qualifier, c.name) for c in cols]
    if len(set(keys)) != len(keys):
        dup = next(k for k in keys if keys.count(k) > 1)
        raise SchemaError(f"{where} produces duplicate column {dup[0]}.{dup[1]}; rename one side")


def _condition(c, cols: list[Column]) -> Callable[[tuple], bool]:
    if isinstance(c, OrCondition):
        branches = [[_condition(x, cols) for x in b] for b in c.branches]
        return lambda row: any(all(p(row) for p in b) for b in branches)
    li = find_column(cols, c.left)
    fn = OPERATOR_FN[c.op]
    if isinstance(c.right, Const):
        v = c.right.value
        check_sorts(cols[li].sort, sort_of(v), f"condition {c.left} {c.op} {v!r}")
        return lambda row: fn(row[li], v)
    ri = find_column(cols, c.right)
    check_sorts(cols[li].sort, cols[ri].sort, f"condition {c.left} {c.op} {c.right}")
    return lambda row: fn(row[li], row[ri])


def shared_names(left: list[Column], right: list[Column]) -> list[tuple[int, int]]:
    pairs = []
    for name in dict.fromkeys(c.name for c in left):
        if any(c.name == name for c in right):
            li = [i for i, c in enumerate(left) if c.name == name]
            ri = [i for i, c in enumerate(right) if c.name == name]
            if len(li) > 1 or len(ri) > 1:
                raise SchemaError(f"natural join on ambiguous attribute {name}")
            check_sorts(left[li[0]].sort, right[ri[0]].sort, f"natural join on {name}")
            pairs.append((li[0], ri[0]))
    return pairs


def alignment(left: list[Column], right: list[Column], op: str) -> list[int]:
    if len(left) != len(right):
        raise SchemaError(f"{op} operands have arities {len(left)} and {len(right)}")
    lnames = [c.name for c in left]
    rnames = [c.name for c in right]
    if set(lnames) == set(rnames) and len(set(lnames)) == len(lnames):
        perm = [rnames.index(n) for n in lnames]
    else:
        perm = list(range(len(left)))
    for i, j in enumerate(perm):
        check_sorts(left[i].sort, right[j].sort, f"{op} column {left[i].name}")
    return perm


def _compile(e, schema: Schema) -> tuple[list[Column], Rows]:
    if isinstance(e, Relation):
        rel = schema.relation(e.name)
        q = e.alias or e.name
        cols = [Column(q, a.name, a.sort) for a in rel.attributes]
        name = e.name
        return cols, lambda db: db[name]
    if isinstance(e, Project):
        cols, child = _compile(e.child, schema)
        idx = [find_column(cols, c) for c in e.columns]
        out = [cols[i] for i in idx]
        no_duplicates(out, "projection")
        return out, lambda db: frozenset(tuple(r[i] for i in idx) for r in child(db))
    if isinstance(e, Select):
        cols, child = _compile(e.child, schema)
        preds = [_condition(c, cols) for c in e.conditions]
        return cols, lambda db: frozenset(r for r in child(db) if all(p(r) for p in preds))
    if isinstance(e, Rename):
        cols, child = _compile(e.child, schema)
        if e.relation is not None:
            out = [Column(e.relation, c.name, c.sort) for c in cols]
        else:
            out = list(cols)
            for ref, new in e.attributes:
                i = find_column(cols, ref)
                out[i] = Column(out[i].qualifier, new, out[i].sort)
        no_duplicates(out, "rename")
        return out, child
    lcols, left = _compile(e.left, schema)
    rcols, right = _compile(e.right, schema)
    if isinstance(e, Product):
        out = lcols + rcols
        no_duplicates(out, "product")
        return out, lambda db: frozenset(a + b for a in left(db) for b in right(db))
    if isinstance(e, (Minus, Union_)):
        perm = alignment(lcols, rcols, "difference" if isinstance(e, Minus) else "union")
        aligned = lambda db: frozenset(tuple(r[j] for j in perm) for r in right(db))
        if isinstance(e, Minus):
            return lcols, lambda db: left(db) - aligned(db)
        return lcols, lambda db: left(db) | aligned(db)
    if isinstance(e, Join) and e.conditions:
        out = lcols + rcols
        no_duplicates(out, "join")
        preds = [_condition(c, out) for c in e.conditions]
        return out, lambda db: frozenset(
            a + b for a in left(db) for b in right(db) if all(p(a + b) for p in preds)
        )
    if isinstance(e, Join):
        pairs = shared_names(lcols, rcols)
        drop = {j for _, j in pairs}
        keep = [j for j in range(len(rcols)) if j not in drop]
        out = lcols + [rcols[j] for j in keep]
        no_duplicates(out, "natural join")

        def natural(db):
            index: dict = {}
            for b in right(db):
                index.setdefault(tuple(b[j] for _, j in pairs), []).append(b)
            rows = set()
            for a in left(db):
                for b in index.get(tuple(a[i] for i, _ in pairs), ()):
                    rows.add(a + tuple(b[j] for j in keep))
            return frozenset(rows)

        return out, natural
    if isinstance(e, Antijoin):
        if e.conditions:
            both = lcols + rcols
            preds = [_condition(c, both) for c in e.conditions]
            return lcols, lambda db: frozenset(
                a for a in left(db) if not any(all(p(a + b) for p in preds) for b in right(db))
            )
        pairs = shared_names(lcols, rcols)

        def anti(db):
            keys = {tuple(b[j] for _, j in pairs) for b in right(db)}
            return frozenset(a for a in left(db) if tuple(a[i] for i, _ in pairs) not in keys)

        return lcols, anti
    raise TypeError(f"unknown expression {type(e).__name__}")


def ra_columns(e, schema: Schema) -> list[Column]:
    """Output columns of ``e``; raises :class:`SchemaError` on ill-typed expressions."""
    return _compile(e, schema)[0]


def compile_ra(e, schema: Schema) -> Callable[[Instance], ResultRelation]:
    cols, rows = _compile(e, schema)
    attrs = tuple(c.name for c in cols)
    return lambda db: ResultRelation(attrs, rows(db))

