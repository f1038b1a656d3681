"""Tuple relational calculus syntax tree.

A query body is a :class:`Scope`: a list of quantified table variables
followed by a conjunction. Negation always wraps a whole scope, so the
negation hierarchy of a formula is the tree of scopes reachable through
:class:`Negation` nodes. :class:`Exists` (a positive nested quantifier) and
:class:`Disjunction` occur only in non-canonical or disjunctive input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Union

from ..errors import SourceSpan
from .common import Const, span_field


@dataclass(frozen=True)
class AttrRef:
    var: str
    attr: str
    span: SourceSpan | None = span_field()

    def __str__(self) -> str:
        return f"{self.var}.{self.attr}"


Operand = Union[AttrRef, Const]


@dataclass(frozen=True)
class Predicate:
    left: Operand
    op: str
    right: Operand
    span: SourceSpan | None = span_field()

    def refs(self) -> tuple[AttrRef, ...]:
        return tuple(o for o in (self.left, self.right) if isinstance(o, AttrRef))


@dataclass(frozen=True)
class Quantifier:
    var: str
    relation: str
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Scope:
    quantified: tuple[Quantifier, ...] = ()
    conjuncts: tuple[Formula, ...] = ()

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(q.var for q in self.quantified)


@dataclass(frozen=True)
class Negation:
    scope: Scope
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Exists:
    scope: Scope
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Disjunction:
    branches: tuple[Scope, ...]
    span: SourceSpan | None = span_field()


Formula = Union[Predicate, Negation, Exists, Disjunction]


@dataclass(frozen=True)
class OutputColumn:
    """Output attribute ``name`` equal to ``source``.

    ``source`` is ``None`` only in disjunctive queries whose linkage
    predicates (``q.A = r.A``) stay inside the disjuncts.
    """

    name: str
    source: AttrRef | None


@dataclass(frozen=True)
class Output:
    name: str
    columns: tuple[OutputColumn, ...]

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


@dataclass(frozen=True)
class TrcQuery:
    output: Output | None
    body: Scope

    @property
    def is_boolean(self) -> bool:
        return self.output is None


def iter_scopes(scope: Scope, depth: int = 0) -> Iterator[tuple[Scope, int]]:
    """Preorder over ``scope`` and every nested scope (through any node kind)."""
    yield scope, depth
    for c in scope.conjuncts:
        if isinstance(c, Negation):
            yield from iter_scopes(c.scope, depth + 1)
        elif isinstance(c, Exists):
            yield from iter_scopes(c.scope, depth)
        elif isinstance(c, Disjunction):
            for b in c.branches:
                yield from iter_scopes(b, depth)


def quantifiers(q: TrcQuery | Scope) -> list[Quantifier]:
    """Table references in textual (preorder) order."""
    scope = q.body if isinstance(q, TrcQuery) else q
    return [quant for s, _ in iter_scopes(scope) for quant in s.quantified]


def predicates(scope: Scope) -> Iterator[Predicate]:
    for s, _ in iter_scopes(scope):
        for c in s.conjuncts:
            if isinstance(c, Predicate):
                yield c


def constants(q: TrcQuery) -> set:
    out = set()
    for p in predicates(q.body):
        for o in (p.left, p.right):
            if isinstance(o, Const):
                out.add(o.value)
    return out


def map_refs(scope: Scope, fn) -> Scope:
    """Rebuild ``scope`` applying ``fn`` to every :class:`AttrRef`."""

    def operand(o):
        return fn(o) if isinstance(o, AttrRef) else o

    def formula(c):
        if isinstance(c, Predicate):
            return replace(c, left=operand(c.left), right=operand(c.right))
        if isinstance(c, Negation):
            return replace(c, scope=map_refs(c.scope, fn))
        if isinstance(c, Exists):
            return replace(c, scope=map_refs(c.scope, fn))
        return replace(c, branches=tuple(map_refs(b, fn) for b in c.branches))

    return Scope(scope.quantified, tuple(formula(c) for c in scope.conjuncts))


def rename_variables(q: TrcQuery, mapping: dict[str, str]) -> TrcQuery:
    """Rename table variables everywhere (quantifiers, predicates, output)."""

    def ref(r: AttrRef) -> AttrRef:
        return replace(r, var=mapping.get(r.var, r.var))

    def scope(s: Scope) -> Scope:
        s = map_refs(s, ref)
        return _rename_quantifiers(s, mapping)

    out = q.output
    if out is not None:
        out = Output(
            out.name,
            tuple(OutputColumn(c.name, ref(c.source) if c.source else None) for c in out.columns),
        )
    return TrcQuery(out, scope(q.body))


def _rename_quantifiers(s: Scope, mapping: dict[str, str]) -> Scope:
    quants = tuple(replace(x, var=mapping.get(x.var, x.var)) for x in s.quantified)
    conj = []
    for c in s.conjuncts:
        if isinstance(c, (Negation, Exists)):
            c = replace(c, scope=_rename_quantifiers(c.scope, mapping))
        elif isinstance(c, Disjunction):
            c = replace(c, branches=tuple(_rename_quantifiers(b, mapping) for b in c.branches))
        conj.append(c)
    return Scope(quants, tuple(conj))


def rename_relations(q: TrcQuery, names: list[str]) -> TrcQuery:
    """Replace the relation of the i-th table reference (preorder) by ``names[i]``."""
    it = iter(names)

    def scope(s: Scope) -> Scope:
        quants = tuple(replace(x, relation=next(it)) for x in s.quantified)
        conj = []
        for c in s.conjuncts:
            if isinstance(c, (Negation, Exists)):
                c = replace(c, scope=scope(c.scope))
            elif isinstance(c, Disjunction):
                c = replace(c, branches=tuple(scope(b) for b in c.branches))
            conj.append(c)
        return Scope(quants, tuple(conj))

    return TrcQuery(q.output, scope(q.body))
