"""SQL* to TRC* and back.

Membership and quantified subqueries become existential scopes: ``IN`` and
``ANY`` turn into a positive nested scope with an added comparison, while
``NOT IN`` and ``ALL`` turn into a negated scope (``ALL`` with the
complemented operator). Positive nested scopes are then hoisted by
canonicalization.
"""

from __future__ import annotations

from ..ast.checks import canonicalize_trc, classify_trc
from ..ast.common import COMPLEMENT, FLIPPED, Const
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
    TableRef,
    Union_,
)
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
    quantifiers,
)
from ..catalog import Schema
from ..errors import SchemaError, TranslationError
from ..parse.trc import RESERVED
from .trace import TraceLog, TranslationTrace

OUTPUT = "q"


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    k = 2
    while f"{name}{k}" in taken:
        k += 1
    return f"{name}{k}"


class _ToTrc:
    def __init__(self, schema: Schema | None, log: TraceLog | None = None):
        self.schema = schema
        self.taken = set(RESERVED) | {OUTPUT}
        self.order: list[str] = []  # TRC variable of each FROM item, preorder
        self.log = log

    def _step(self, text: str, *elements: str) -> None:
        if self.log is not None:
            self.log.step(text, *elements)

    def _attrs(self, relation: str) -> tuple[str, ...] | None:
        if self.schema is None:
            return None
        return self.schema.relation(relation).attribute_names

    def frame(self, froms: tuple[TableRef, ...]) -> tuple[dict, list[Quantifier]]:
        items: dict[str, tuple[str, str]] = {}
        quants = []
        for t in froms:
            if t.name in items:
                raise SchemaError(f"FROM item {t.name} appears twice; add an alias")
            var = _fresh(t.name.lower(), self.taken)
            self.taken.add(var)
            self.order.append(var)
            items[t.name] = (var, t.relation)
            quants.append(Quantifier(var, t.relation, t.span))
        return items, quants

    def resolve(self, col: ColumnRef, frames: list[dict]) -> AttrRef:
        for items in reversed(frames):
            if col.table is not None:
                if col.table in items:
                    var, rel = items[col.table]
                    attrs = self._attrs(rel)
                    if attrs is not None and col.attr not in attrs:
                        raise SchemaError(f"{rel} has no attribute {col.attr}")
                    return AttrRef(var, col.attr, col.span)
                continue
            if self.schema is None:
                raise SchemaError(f"unqualified column {col.attr} needs a schema to resolve")
            hits = [(var, rel) for var, rel in items.values() if col.attr in self._attrs(rel)]
            if len(hits) > 1:
                raise SchemaError(f"ambiguous column {col.attr}")
            if hits:
                return AttrRef(hits[0][0], col.attr, col.span)
        raise SchemaError(f"unknown column {col}")

    def columns(self, s: Select, items: dict, frames: list[dict]) -> list[AttrRef]:
        if s.columns is not None:
            return [self.resolve(c, frames) for c in s.columns]
        if self.schema is None:
            raise SchemaError("SELECT * needs a schema to expand")
        return [AttrRef(items[t.name][0], a) for t in s.from_ for a in self._attrs(t.relation)]

    def block(self, s: Select, frames: list[dict], extra=None) -> Scope:
        """Scope of a subquery; ``extra(cols)`` adds predicates on its select list."""
        items, quants = self.frame(s.from_)
        inner = frames + [items]
        conj = [c for cond in s.where for c in self.condition(cond, inner)]
        if extra is not None:
            conj.extend(extra(self.columns(s, items, inner)))
        return Scope(tuple(quants), tuple(conj))

    def operand(self, o, frames):
        return o if isinstance(o, Const) else self.resolve(o, frames)

    def condition(self, c, frames: list[dict]) -> list:
        if isinstance(c, Comparison):
            return [Predicate(self.resolve(c.left, frames), c.op, self.operand(c.right, frames), c.span)]
        if isinstance(c, NotGroup):
            inner = [x for cond in c.conditions for x in self.condition(cond, frames)]
            return [Negation(Scope((), tuple(inner)), c.span)]
        if isinstance(c, OrCond):
            branches = tuple(
                Scope((), tuple(x for cond in b for x in self.condition(cond, frames))) for b in c.branches
            )
            return [Disjunction(branches, c.span)]
        if isinstance(c, ExistsCond):
            scope = self.block(c.query, frames)
            return [Negation(scope, c.span) if c.negated else Exists(scope, c.span)]
        if isinstance(c, InCond):
            outer = [self.resolve(x, frames) for x in c.columns]

            def links(cols: list[AttrRef]) -> list[Predicate]:
                if len(cols) != len(outer):
                    raise SchemaError(f"IN compares {len(outer)} columns with {len(cols)}")
                return [Predicate(d, "=", o) for d, o in zip(cols, outer)]

            scope = self.block(c.query, frames, links)
            self._step("membership subquery becomes an existential scope", *(str(x) for x in outer))
            return [Negation(scope, c.span) if c.negated else Exists(scope, c.span)]
        if isinstance(c, QuantifiedCond):
            outer = self.resolve(c.column, frames)
            op = c.op if c.quantifier == "any" else COMPLEMENT[c.op]

            def compare(cols: list[AttrRef]) -> list[Predicate]:
                if len(cols) != 1:
                    raise SchemaError(f"{c.quantifier.upper()} subquery must select one column")
                return [Predicate(outer, op, cols[0])]

            scope = self.block(c.query, frames, compare)
            self._step(f"{c.quantifier.upper()} subquery becomes an existential scope", str(outer))
            return [Exists(scope, c.span) if c.quantifier == "any" else Negation(scope, c.span)]
        raise TypeError(f"unknown condition {type(c).__name__}")

    def boolean(self, q: BooleanSelect) -> Scope:
        if q.kind == "not":
            conds = q.conditions
            if len(conds) == 1 and isinstance(conds[0], NotGroup):
                # SELECT NOT (NOT (P)) is the sentence P
                return Scope((), tuple(x for c in conds[0].conditions for x in self.condition(c, [])))
            return Scope((), (Negation(Scope((), tuple(x for c in conds for x in self.condition(c, [])))),))
        scope = self.block(q.query, [])
        if q.kind == "not exists":
            return Scope((), (Negation(scope),))
        return scope

    def query(self, q) -> TrcQuery:
        if isinstance(q, BooleanSelect):
            return TrcQuery(None, self.boolean(q))
        if isinstance(q, Union_):
            return self.union(q)
        items, quants = self.frame(q.from_)
        frames = [items]
        conj = [x for cond in q.where for x in self.condition(cond, frames)]
        cols = self.columns(q, items, frames)
        names: set[str] = set()
        out = []
        for ref in cols:
            name = _fresh(ref.attr, names)
            names.add(name)
            out.append(OutputColumn(name, ref))
        return TrcQuery(Output(OUTPUT, tuple(out)), Scope(tuple(quants), tuple(conj)))

    def union(self, q: Union_) -> TrcQuery:
        parts = [self.query(p) for p in q.queries]
        if any(p.is_boolean for p in parts):
            if not all(p.is_boolean for p in parts):
                raise SchemaError("UNION mixes Boolean and non-Boolean queries")
            return TrcQuery(None, Scope((), (Disjunction(tuple(p.body for p in parts)),)))
        width = {len(p.output.columns) for p in parts}
        if len(width) != 1:
            raise SchemaError(f"UNION branches have arities {sorted(width)}")
        names = parts[0].output.attributes
        branches = []
        for p in parts:
            links = tuple(
                Predicate(AttrRef(OUTPUT, n), "=", col.source) for n, col in zip(names, p.output.columns)
            )
            branches.append(Scope(p.body.quantified, links + p.body.conjuncts))
        output = Output(OUTPUT, tuple(OutputColumn(n, None) for n in names))
        return TrcQuery(output, Scope((), (Disjunction(tuple(branches)),)))


def sql_to_trc_raw(q, schema: Schema | None = None) -> TrcQuery:
    """Structural TRC reading of ``q`` before canonicalization.

    Positive subqueries stay as nested existential scopes, OR and UNION stay
    as disjunctions; useful for guardedness and fragment checks.
    """
    return _ToTrc(schema).query(q)


def sql_to_trc(q, schema: Schema | None = None) -> tuple[TrcQuery, TranslationTrace]:
    """Canonical TRC* query equivalent to the SQL* query ``q``.

    ``schema`` is needed only for ``SELECT *`` and unqualified columns.
    """
    log = TraceLog()
    conv = _ToTrc(schema, log)
    raw = conv.query(q)
    log.step("FROM items become table variables", *conv.order)
    trc = canonicalize_trc(raw)
    log.step("hoist quantifiers to the head of each negation scope")
    report = classify_trc(trc)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"query is outside the fragment ({v.kind}): {v.message}")
    position = {x.var: i for i, x in enumerate(quantifiers(trc))}
    return trc, log.trace("sql", "trc", [position[v] for v in conv.order])


# ---------------------------------------------------------------------------
# TRC to SQL


class _ToSql:
    def __init__(self, q: TrcQuery):
        self.names: dict[str, str] = {}
        taken: set[str] = set()
        for x in quantifiers(q):
            if x.var.lower() == x.relation.lower() and x.relation not in taken:
                name = x.relation
            else:
                name = _fresh(x.var, taken)
            taken.add(name)
            self.names[x.var] = name

    def table(self, x: Quantifier) -> TableRef:
        name = self.names[x.var]
        return TableRef(x.relation, None if name == x.relation else name)

    def col(self, r: AttrRef) -> ColumnRef:
        return ColumnRef(self.names[r.var], r.attr)

    def conditions(self, conj) -> tuple:
        out = []
        for c in conj:
            if isinstance(c, Predicate):
                left, op, right = c.left, c.op, c.right
                if isinstance(left, Const):
                    left, op, right = right, FLIPPED[op], left
                out.append(Comparison(self.col(left), op, right if isinstance(right, Const) else self.col(right)))
            elif isinstance(c, Negation):
                s = c.scope
                if s.quantified:
                    out.append(ExistsCond(self.select(s, None), negated=True))
                else:
                    out.append(NotGroup(self.conditions(s.conjuncts)))
            else:
                raise TranslationError("query is not canonical and non-disjunctive")
        return tuple(out)

    def select(self, s: Scope, columns, distinct: bool = False) -> Select:
        return Select(columns, tuple(self.table(x) for x in s.quantified), self.conditions(s.conjuncts), distinct)


def trc_to_sql(q: TrcQuery) -> tuple:
    """Canonical SQL* for a canonical TRC* query (one SELECT block per scope)."""
    report = classify_trc(q)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"query is outside the fragment ({v.kind}): {v.message}")
    conv = _ToSql(q)
    log = TraceLog()
    log.step("table variables become FROM items", *(f"{v}->{n}" for v, n in conv.names.items()))
    log.step("negation scopes become NOT EXISTS subqueries")
    n = len(quantifiers(q))
    body = q.body
    if q.output is not None:
        cols = tuple(conv.col(c.source) for c in q.output.columns)
        out = conv.select(body, cols, distinct=True)
    elif body.quantified:
        out = BooleanSelect("exists", conv.select(body, None))
    elif len(body.conjuncts) == 1 and isinstance(body.conjuncts[0], Negation):
        inner = body.conjuncts[0].scope
        if inner.quantified:
            out = BooleanSelect("not exists", conv.select(inner, None))
        else:
            out = BooleanSelect("not", None, conv.conditions(inner.conjuncts))
    else:
        out = BooleanSelect("not", None, (NotGroup(conv.conditions(body.conjuncts)),))
    log.step("Boolean head" if q.output is None else "output attributes become the SELECT DISTINCT list")
    return out, log.trace("trc", "sql", range(n))
