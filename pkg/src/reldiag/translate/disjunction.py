"""Disjunction elimination: arbitrary safe TRC or SQL to a diagram with union cells.

Each scope is brought into disjunctive normal form. Below the root a
negated disjunction distributes its quantifiers over the disjuncts, so
``not exists r [c1 or c2]`` becomes ``not exists r1 [c1] and not exists r2 [c2]``.
Disjuncts that survive at the root become separate union cells; for a
Boolean sentence they are joined by a double negation instead.
"""

from __future__ import annotations

from dataclasses import replace
from itertools import product

from ..ast.checks import _rename_free, canonicalize_trc, lift_output_links
from ..ast.common import COMPLEMENT, FLIPPED, Const
from ..ast.trc import (
    AttrRef,
    Disjunction,
    Exists,
    Negation,
    Output,
    OutputColumn,
    Predicate,
    Quantifier,
    Scope,
    TrcQuery,
)
from ..catalog import Schema
from ..diagram import Diagram, normalize
from ..errors import TranslationError
from ..parse.trc import RESERVED
from .trc_diagram import trc_to_diagram

MAX_DISJUNCTS = 64

# A disjunct is a conjunctive scope: (quantifiers, literals) where literals
# are predicates or negations of disjunction-free scopes.
_Disjunct = tuple[tuple[Quantifier, ...], tuple]


def _complement(p: Predicate) -> Predicate:
    return replace(p, op=COMPLEMENT[p.op])


def _rename_literals(lits: tuple, old: str, new: str) -> tuple:
    return _rename_free(Scope((), lits), old, new).conjuncts


class _Dnf:
    def __init__(self, reserved: set[str]):
        self.reserved = reserved

    def check(self, ds: list) -> list:
        if len(ds) > MAX_DISJUNCTS:
            raise TranslationError(f"disjunctive normal form needs {len(ds)} disjuncts (limit {MAX_DISJUNCTS})")
        return ds

    def merge(self, a: _Disjunct, b: _Disjunct) -> _Disjunct:
        quants, lits = b
        names = {x.var for x in a[0]}
        renamed = []
        for x in quants:
            if x.var in names:
                new = x.var
                k = 2
                while new in names or new in self.reserved:
                    new = f"{x.var}_{k}"
                    k += 1
                lits = _rename_literals(lits, x.var, new)
                x = replace(x, var=new)
            names.add(x.var)
            renamed.append(x)
        return a[0] + tuple(renamed), a[1] + lits

    def combine(self, left: list, right: list) -> list:
        return self.check([self.merge(a, b) for a, b in product(left, right)])

    def scope(self, s: Scope) -> list:
        """Disjuncts equivalent to ``exists s.quantified [s.conjuncts]``."""
        result: list = [(s.quantified, ())]
        for c in s.conjuncts:
            if isinstance(c, Predicate):
                options = [((), (c,))]
            elif isinstance(c, Exists):
                options = self.scope(c.scope)
            elif isinstance(c, Disjunction):
                options = self.check([d for b in c.branches for d in self.scope(b)])
            else:
                options = self.negate(c.scope)
            result = self.combine(result, options)
        return result

    def negate(self, s: Scope) -> list:
        """Disjuncts equivalent to the negation of ``s``."""
        if s.quantified:
            return [((), tuple(Negation(Scope(q, lits)) for q, lits in self.scope(s)))]
        options: list = []
        for c in s.conjuncts:
            if isinstance(c, Predicate):
                options.append(((), (_complement(c),)))
            elif isinstance(c, Negation):
                options.extend(self.scope(c.scope))
            elif isinstance(c, Exists):
                options.extend(self.negate(c.scope))
            else:
                acc: list = [((), ())]
                for b in c.branches:
                    acc = self.combine(acc, self.negate(b))
                options.extend(acc)
        return self.check(options)


def _unique_variables(q: TrcQuery) -> TrcQuery:
    """Give every quantifier a distinct name; copies of ``r2`` become ``r3``, ``r4``, ..."""
    used: set[str] = set(RESERVED) | ({q.output.name} if q.output else set())

    def fresh(name: str) -> str:
        if name not in used:
            return name
        base = name.rstrip("0123456789") or name
        k = 2
        while f"{base}{k}" in used:
            k += 1
        return f"{base}{k}"

    def visit(s: Scope, env: dict[str, str]) -> Scope:
        env = dict(env)
        quants = []
        for x in s.quantified:
            new = fresh(x.var)
            used.add(new)
            env[x.var] = new
            quants.append(replace(x, var=new))

        def operand(o):
            if isinstance(o, AttrRef) and o.var in env:
                return replace(o, var=env[o.var])
            return o

        conj = []
        for c in s.conjuncts:
            if isinstance(c, Predicate):
                conj.append(replace(c, left=operand(c.left), right=operand(c.right)))
            else:
                conj.append(replace(c, scope=visit(c.scope, env)))
        return Scope(tuple(quants), tuple(conj))

    return TrcQuery(q.output, visit(q.body, {}))


def _unlift(q: TrcQuery) -> TrcQuery:
    """Turn structural output links back into ``q.A = r.A`` predicates."""
    if q.output is None:
        return q
    links = tuple(
        Predicate(AttrRef(q.output.name, c.name), "=", c.source) for c in q.output.columns if c.source is not None
    )
    out = Output(q.output.name, tuple(OutputColumn(c.name, None) for c in q.output.columns))
    return TrcQuery(out, Scope(q.body.quantified, links + q.body.conjuncts))


def _orient(p: Predicate) -> Predicate:
    if isinstance(p.left, Const) and not isinstance(p.right, Const):
        return Predicate(p.right, FLIPPED[p.op], p.left, p.span)
    return p


def _oriented(s: Scope) -> Scope:
    conj = [_orient(c) if isinstance(c, Predicate) else replace(c, scope=_oriented(c.scope)) for c in s.conjuncts]
    return Scope(s.quantified, tuple(conj))


def disjunction_free(q, schema: Schema | None = None) -> list[TrcQuery]:
    """Disjunction-free TRC queries whose union equals ``q`` (a TRC or SQL query).

    A Boolean sentence always yields a single query.
    """
    if not isinstance(q, TrcQuery):
        from .sql_trc import sql_to_trc_raw

        q = sql_to_trc_raw(q, schema)
    q = _unlift(canonicalize_trc(q))
    reserved = set(RESERVED) | ({q.output.name} if q.output else set())
    disjuncts = _Dnf(reserved).scope(q.body)
    if not disjuncts:
        raise TranslationError("query is unsatisfiable: every disjunct is contradictory")
    if q.output is None and len(disjuncts) > 1:
        inner = tuple(Negation(Scope(quants, lits)) for quants, lits in disjuncts)
        disjuncts = [((), (Negation(Scope((), inner)),))]
    out = []
    for quants, lits in disjuncts:
        d = TrcQuery(q.output, _oriented(Scope(quants, lits)))
        out.append(lift_output_links(_unique_variables(d)))
    return out


def eliminate_disjunction(q, schema: Schema | None = None) -> Diagram:
    """Logically equivalent diagram for a TRC or SQL query with ``or`` / ``UNION``.

    The result is a single cell when no disjunction survives at the root.
    It is pattern-preserving only when the input had no disjunction at all.
    """
    cells = []
    name = None
    for part in disjunction_free(q, schema):
        d, _ = trc_to_diagram(part)
        cells.extend(d.cells)
        name = d.output_name
    return normalize(Diagram(tuple(cells), name))
