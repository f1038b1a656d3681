"""Nested-loop evaluation of tuple relational calculus.

Each scope enumerates assignments of its table variables; a predicate is
tested as soon as every variable it mentions is bound. Every quantifier gets
its own environment slot, so inner variables may shadow outer ones. Queries
whose output linkage sits inside disjuncts are evaluated by enumerating
candidate output tuples over the active domain plus the query constants.
"""

from __future__ import annotations

import itertools
from typing import Callable

from ..ast.common import Const
from ..ast.trc import (
    AttrRef,
    Disjunction,
    Exists,
    Negation,
    Output,
    OutputColumn,
    Predicate,
    Scope,
    TrcQuery,
    constants,
)
from ..catalog import Schema, sort_of
from ..errors import FragmentError, SchemaError
from .common import OPERATOR_FN, Instance, ResultRelation, check_sorts

Check = Callable[[list, Instance], bool]
OUT_SLOT = 0


class _Context:
    def __init__(self, schema: Schema, out_name: str | None, out_sorts: dict[str, str | None]):
        self.schema = schema
        self.out_name = out_name
        self.out_sorts = out_sorts
        self.out_index: dict[str, int] = {}
        self.slots = 1

    def new_slot(self) -> int:
        self.slots += 1
        return self.slots - 1

    def resolve(self, ref: AttrRef, scope_vars: dict) -> tuple[int, int, str | None]:
        if ref.var not in scope_vars:
            if ref.var == self.out_name:
                if ref.attr not in self.out_index:
                    raise SchemaError(f"output {ref.var} has no attribute {ref.attr}")
                return OUT_SLOT, self.out_index[ref.attr], self.out_sorts.get(ref.attr)
            raise FragmentError(f"unscoped variable {ref.var}")
        slot, relation = scope_vars[ref.var]
        rel = self.schema.relation(relation)
        return slot, rel.index(ref.attr), rel.sort(ref.attr)


def _free_vars(c, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(c, Predicate):
        return {r.var for r in c.refs()} - bound
    if isinstance(c, (Negation, Exists)):
        return _scope_free(c.scope, bound)
    out: set[str] = set()
    for b in c.branches:
        out |= _scope_free(b, bound)
    return out


def _scope_free(s: Scope, bound: frozenset) -> set[str]:
    inner = bound | set(s.variables)
    out: set[str] = set()
    for c in s.conjuncts:
        out |= _free_vars(c, inner)
    return out


def _predicate(p: Predicate, ctx: _Context, scope_vars: dict) -> Check:
    fn = OPERATOR_FN[p.op]
    sides = []
    for o in (p.left, p.right):
        if isinstance(o, Const):
            sides.append((None, o.value, sort_of(o.value)))
        else:
            sides.append(ctx.resolve(o, scope_vars))
    (ls, li, lsort), (rs, ri, rsort) = sides
    check_sorts(lsort, rsort, f"predicate {p.left} {p.op} {p.right}")
    if ls is not None and rs is not None:
        return lambda env, db: fn(env[ls][li], env[rs][ri])
    if ls is not None:
        return lambda env, db: fn(env[ls][li], ri)
    if rs is not None:
        return lambda env, db: fn(li, env[rs][ri])
    result = fn(li, ri)
    return lambda env, db: result


class _ScopeProgram:
    """Compiled scope: bind variables level by level, testing checks early."""

    def __init__(self, scope: Scope, ctx: _Context, outer: dict):
        self.vars: list[tuple[int, str]] = []
        scope_vars = dict(outer)
        order: dict[str, int] = {}
        for i, x in enumerate(scope.quantified):
            ctx.schema.relation(x.relation)
            slot = ctx.new_slot()
            self.vars.append((slot, x.relation))
            scope_vars[x.var] = (slot, x.relation)
            order[x.var] = i + 1
        levels: list[list[Check]] = [[] for _ in range(len(self.vars) + 1)]
        for c in scope.conjuncts:
            if isinstance(c, Predicate):
                level = max((order.get(v, 0) for v in _free_vars(c)), default=0)
                levels[level].append(_predicate(c, ctx, scope_vars))
            else:
                levels[len(self.vars)].append(_compound(c, ctx, scope_vars))
        self.pre = levels[0]
        self.levels = levels[1:]

    def satisfiable(self, env: list, db: Instance) -> bool:
        for c in self.pre:
            if not c(env, db):
                return False
        return self._search(0, env, db)

    def _search(self, i: int, env: list, db: Instance) -> bool:
        if i == len(self.vars):
            return True
        slot, rel = self.vars[i]
        checks = self.levels[i]
        for t in db[rel]:
            env[slot] = t
            if all(c(env, db) for c in checks) and self._search(i + 1, env, db):
                return True
        return False

    def solutions(self, env: list, db: Instance):
        """Yield ``env`` once per satisfying assignment (mutated in place)."""
        if not all(c(env, db) for c in self.pre):
            return
        yield from self._enumerate(0, env, db)

    def _enumerate(self, i: int, env: list, db: Instance):
        if i == len(self.vars):
            yield env
            return
        slot, rel = self.vars[i]
        checks = self.levels[i]
        for t in db[rel]:
            env[slot] = t
            if all(c(env, db) for c in checks):
                yield from self._enumerate(i + 1, env, db)


def _compound(c, ctx: _Context, scope_vars: dict) -> Check:
    if isinstance(c, Negation):
        sub = _ScopeProgram(c.scope, ctx, scope_vars)
        return lambda env, db: not sub.satisfiable(env, db)
    if isinstance(c, Exists):
        sub = _ScopeProgram(c.scope, ctx, scope_vars)
        return sub.satisfiable
    subs = [_ScopeProgram(b, ctx, scope_vars) for b in c.branches]
    return lambda env, db: any(s.satisfiable(env, db) for s in subs)


def _relations_of(scope: Scope, into: dict[str, str]) -> dict[str, str]:
    for x in scope.quantified:
        into.setdefault(x.var, x.relation)
    for c in scope.conjuncts:
        if isinstance(c, (Negation, Exists)):
            _relations_of(c.scope, into)
        elif isinstance(c, Disjunction):
            for b in c.branches:
                _relations_of(b, into)
    return into


def _output_sorts(q: TrcQuery, schema: Schema) -> dict[str, str | None]:
    """Sort of each output attribute, from its link or from ``q.A = r.B`` predicates."""
    from ..ast.trc import predicates

    sorts: dict[str, str | None] = {}
    var_rel = _relations_of(q.body, {})

    def ref_sort(r: AttrRef) -> str | None:
        if r.var in var_rel:
            return schema.relation(var_rel[r.var]).sort(r.attr)
        return None

    for col in q.output.columns:
        if col.source is not None:
            sorts[col.name] = ref_sort(col.source)
    for p in predicates(q.body):
        for a, b in ((p.left, p.right), (p.right, p.left)):
            if isinstance(a, AttrRef) and a.var == q.output.name and sorts.get(a.attr) is None:
                if isinstance(b, AttrRef):
                    sorts[a.attr] = ref_sort(b)
                else:
                    sorts[a.attr] = sort_of(b.value)
    return sorts


def compile_trc(q: TrcQuery, schema: Schema) -> Callable[[Instance], ResultRelation]:
    """Type-check ``q`` against ``schema`` and return an evaluator over instances."""
    if q.output is None:
        ctx = _Context(schema, None, {})
        program = _ScopeProgram(q.body, ctx, {})
        size = ctx.slots

        def run_boolean(db: Instance) -> ResultRelation:
            truth = program.satisfiable([None] * size, db)
            return ResultRelation((), frozenset({()}) if truth else frozenset())

        return run_boolean

    out_name = q.output.name
    out_sorts = _output_sorts(q, schema)
    attrs = q.output.attributes
    ctx = _Context(schema, out_name, out_sorts)
    ctx.out_index = {a: i for i, a in enumerate(attrs)}
    program = _ScopeProgram(q.body, ctx, {})
    size = ctx.slots

    if all(c.source is not None for c in q.output.columns):
        root = {x.var: entry for x, entry in zip(q.body.quantified, program.vars)}
        getters = []
        for col in q.output.columns:
            if col.source.var not in root:
                raise FragmentError(f"output attribute {col.name} is not linked to a root table")
            slot, idx, _ = ctx.resolve(col.source, root)
            getters.append((slot, idx))

        def run(db: Instance) -> ResultRelation:
            rows = {tuple(env[s][i] for s, i in getters) for env in program.solutions([None] * size, db)}
            return ResultRelation(attrs, frozenset(rows))

        return run

    consts = constants(q)
    columns = [(rel.name, i, s) for rel in schema for i, s in enumerate(rel.sorts)]

    def run_candidates(db: Instance) -> ResultRelation:
        pools = []
        for a in attrs:
            sort = out_sorts.get(a)
            pool = {row[i] for name, i, s in columns if sort in (None, s) for row in db[name]}
            pool |= {c for c in consts if sort in (None, sort_of(c))}
            pools.append(sorted(pool, key=lambda v: (isinstance(v, str), v)))
        rows = set()
        env = [None] * size
        for cand in itertools.product(*pools):
            env[OUT_SLOT] = cand
            if program.satisfiable(env, db):
                rows.add(cand)
        return ResultRelation(attrs, frozenset(rows))

    return run_candidates


def evaluate_trc_by_candidates(q: TrcQuery, schema: Schema, db: Instance) -> ResultRelation:
    """Reference semantics: test every candidate output tuple over the active domain.

    Ignores the structural output linkage (it is turned back into ordinary
    equality predicates), so it serves as an independent oracle in tests.
    """
    if q.output is None:
        return compile_trc(q, schema)(db)
    links = [
        Predicate(AttrRef(q.output.name, c.name), "=", c.source)
        for c in q.output.columns
        if c.source is not None
    ]
    body = Scope(q.body.quantified, tuple(links) + q.body.conjuncts)
    columns = tuple(OutputColumn(c.name, None) for c in q.output.columns)
    return compile_trc(TrcQuery(Output(q.output.name, columns), body), schema)(db)
