"""SQL syntax tree for the nested SELECT fragment (plus OR / UNION for disjunctive input)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Union

from ..errors import SourceSpan
from .common import Const, span_field


@dataclass(frozen=True)
class ColumnRef:
    table: str | None
    attr: str
    span: SourceSpan | None = span_field()

    def __str__(self) -> str:
        return f"{self.table}.{self.attr}" if self.table else self.attr


@dataclass(frozen=True)
class TableRef:
    relation: str
    alias: str | None = None
    span: SourceSpan | None = span_field()

    @property
    def name(self) -> str:
        """Name by which columns refer to this FROM item."""
        return self.alias or self.relation


@dataclass(frozen=True)
class Comparison:
    left: ColumnRef
    op: str
    right: Union[ColumnRef, Const]
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class NotGroup:
    """``NOT ( P )``"""

    conditions: tuple[Condition, ...]
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class ExistsCond:
    query: Select
    negated: bool = False
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class InCond:
    """``C [NOT] IN (Q)``; a tuple of columns on the left compares row-wise."""

    columns: tuple[ColumnRef, ...]
    query: Select
    negated: bool = False
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class QuantifiedCond:
    """``C op ALL (Q)`` or ``C op ANY (Q)``."""

    column: ColumnRef
    op: str
    quantifier: str
    query: Select
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class OrCond:
    """``( P OR P ... )``; each branch is a conjunction."""

    branches: tuple[tuple[Condition, ...], ...]
    span: SourceSpan | None = span_field()


Condition = Union[Comparison, NotGroup, ExistsCond, InCond, QuantifiedCond, OrCond]


@dataclass(frozen=True)
class Select:
    """``SELECT [DISTINCT] cols|* FROM ... [WHERE ...]``; ``columns is None`` means ``*``."""

    columns: tuple[ColumnRef, ...] | None
    from_: tuple[TableRef, ...]
    where: tuple[Condition, ...] = ()
    distinct: bool = False
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class BooleanSelect:
    """``SELECT NOT (P)``, ``SELECT EXISTS (Q)`` or ``SELECT NOT EXISTS (Q)``.

    ``kind`` is ``"not"``, ``"exists"`` or ``"not exists"``.
    """

    kind: str
    query: Select | None = None
    conditions: tuple[Condition, ...] = ()
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Union_:
    queries: tuple[Union[Select, BooleanSelect], ...]
    span: SourceSpan | None = span_field()


SqlQuery = Union[Select, BooleanSelect, Union_]


def subqueries(cond: Condition) -> Iterator[Select]:
    if isinstance(cond, (ExistsCond, InCond, QuantifiedCond)):
        yield cond.query
    elif isinstance(cond, NotGroup):
        for c in cond.conditions:
            yield from subqueries(c)
    elif isinstance(cond, OrCond):
        for branch in cond.branches:
            for c in branch:
                yield from subqueries(c)


def iter_selects(q: SqlQuery) -> Iterator[Select]:
    """Every SELECT block in preorder (FROM list before WHERE subqueries)."""
    if isinstance(q, Union_):
        for part in q.queries:
            yield from iter_selects(part)
        return
    if isinstance(q, BooleanSelect):
        if q.query is not None:
            yield from iter_selects(q.query)
        for c in q.conditions:
            for sub in subqueries(c):
                yield from iter_selects(sub)
        return
    yield q
    for c in q.where:
        for sub in subqueries(c):
            yield from iter_selects(sub)


def table_refs(q: SqlQuery) -> list[TableRef]:
    return [t for s in iter_selects(q) for t in s.from_]


def rename_relations(q: SqlQuery, names: list[str]) -> SqlQuery:
    """Replace the relation of the i-th FROM item (preorder), keeping column qualifiers valid."""
    it = iter(names)

    def sel(s: Select) -> Select:
        froms = tuple(replace(t, relation=next(it), alias=t.name) for t in s.from_)
        return replace(s, from_=froms, where=tuple(cond(c) for c in s.where))

    def cond(c):
        if isinstance(c, (ExistsCond, InCond, QuantifiedCond)):
            return replace(c, query=sel(c.query))
        if isinstance(c, NotGroup):
            return replace(c, conditions=tuple(cond(x) for x in c.conditions))
        if isinstance(c, OrCond):
            return replace(c, branches=tuple(tuple(cond(x) for x in b) for b in c.branches))
        return c

    def top(x):
        if isinstance(x, Union_):
            return replace(x, queries=tuple(top(p) for p in x.queries))
        if isinstance(x, BooleanSelect):
            return replace(
                x,
                query=sel(x.query) if x.query is not None else None,
                conditions=tuple(cond(c) for c in x.conditions),
            )
        return sel(x)

    return top(q)


def constants(q: SqlQuery) -> set:
    out = set()

    def cond(c):
        if isinstance(c, Comparison) and isinstance(c.right, Const):
            out.add(c.right.value)
        elif isinstance(c, NotGroup):
            for x in c.conditions:
                cond(x)
        elif isinstance(c, OrCond):
            for b in c.branches:
                for x in b:
                    cond(x)

    for s in iter_selects(q):
        for c in s.where:
            cond(c)
    if isinstance(q, BooleanSelect):
        for c in q.conditions:
            cond(c)
    return out
