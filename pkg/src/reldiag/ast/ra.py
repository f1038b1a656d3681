"""Relational algebra expression trees (named perspective).

Every column has a qualifier (the relation name, an alias, or a rename
target) and an attribute name. A column reference matches on the name and,
when given, on the qualifier.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Union

from ..errors import SourceSpan
from .common import Const, span_field


@dataclass(frozen=True)
class ColRef:
    qualifier: str | None
    name: str
    span: SourceSpan | None = span_field()

    def __str__(self) -> str:
        return f"{self.qualifier}.{self.name}" if self.qualifier else self.name


@dataclass(frozen=True)
class Condition:
    left: ColRef
    op: str
    right: Union[ColRef, Const]
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class OrCondition:
    """Disjunction of conjunctions; outside the non-disjunctive fragment."""

    branches: tuple[tuple[Condition, ...], ...]
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Relation:
    name: str
    alias: str | None = None
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Project:
    columns: tuple[ColRef, ...]
    child: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Select:
    conditions: tuple[Union[Condition, OrCondition], ...]
    child: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Product:
    left: RaExpr
    right: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Join:
    """Theta join on ``conditions``; natural join when ``conditions`` is empty."""

    conditions: tuple[Condition, ...]
    left: RaExpr
    right: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Minus:
    left: RaExpr
    right: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Union_:
    left: RaExpr
    right: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Rename:
    """Rename attributes (``old -> new`` pairs) or requalify all columns (``relation``)."""

    attributes: tuple[tuple[ColRef, str], ...]
    relation: str | None
    child: RaExpr
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Antijoin:
    """Left tuples without a partner on the right; natural when ``conditions`` is empty."""

    conditions: tuple[Condition, ...]
    left: RaExpr
    right: RaExpr
    span: SourceSpan | None = span_field()


RaExpr = Union[Relation, Project, Select, Product, Join, Minus, Union_, Rename, Antijoin]
BINARY = (Product, Join, Minus, Union_, Antijoin)


def children(e: RaExpr) -> tuple[RaExpr, ...]:
    if isinstance(e, Relation):
        return ()
    if isinstance(e, BINARY):
        return (e.left, e.right)
    return (e.child,)


def walk(e: RaExpr) -> Iterator[RaExpr]:
    yield e
    for c in children(e):
        yield from walk(c)


def leaves(e: RaExpr) -> list[Relation]:
    """Base relation references, left to right."""
    return [n for n in walk(e) if isinstance(n, Relation)]


def rename_relations(e: RaExpr, names: list[str]) -> RaExpr:
    """Replace the i-th leaf's relation by ``names[i]``, keeping its column qualifier."""
    it = iter(names)

    def go(n: RaExpr) -> RaExpr:
        if isinstance(n, Relation):
            return replace(n, name=next(it), alias=n.alias or n.name)
        if isinstance(n, BINARY):
            left = go(n.left)
            return replace(n, left=left, right=go(n.right))
        return replace(n, child=go(n.child))

    return go(e)


def constants(e: RaExpr) -> set:
    out = set()
    for n in walk(e):
        if isinstance(n, (Select, Join, Antijoin)):
            conds = []
            for c in n.conditions:
                if isinstance(c, OrCondition):
                    conds.extend(x for b in c.branches for x in b)
                else:
                    conds.append(c)
            out.update(c.right.value for c in conds if isinstance(c.right, Const))
    return out
