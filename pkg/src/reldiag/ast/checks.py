"""Fragment membership, guardedness and TRC canonicalization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from ..errors import FragmentError, SourceSpan
from . import datalog as dl
from . import ra
from . import sql
from .trc import (
    AttrRef,
    Disjunction,
    Exists,
    Negation,
    Output,
    OutputColumn,
    Predicate,
    Scope,
    TrcQuery,
)

# Violation kinds grouped by the flag they clear.
_FLAG_OF = {
    "disjunction": "non_disjunctive",
    "idb-redefined": "non_disjunctive",
    "idb-reused": "non_disjunctive",
    "recursion": "non_disjunctive",
    "unguarded": "guarded",
    "unsafe": "safe",
    "unscoped": "safe",
    "non-canonical": "canonical",
}


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    span: SourceSpan | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "message": self.message}
        if self.span is not None:
            out["line"] = self.span.line
            out["column"] = self.span.column
            out["start"] = self.span.start
            out["end"] = self.span.end
        return out


@dataclass(frozen=True)
class FragmentReport:
    dialect: str
    violations: tuple[Violation, ...] = field(default=())

    def _flag(self, name: str) -> bool:
        return not any(_FLAG_OF[v.kind] == name for v in self.violations)

    @property
    def non_disjunctive(self) -> bool:
        return self._flag("non_disjunctive")

    @property
    def guarded(self) -> bool:
        return self._flag("guarded")

    @property
    def safe(self) -> bool:
        return self._flag("safe")

    @property
    def canonical(self) -> bool:
        return self._flag("canonical")

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialect": self.dialect,
            "non_disjunctive": self.non_disjunctive,
            "guarded": self.guarded,
            "safe": self.safe,
            "canonical": self.canonical,
            "violations": [v.to_dict() for v in self.violations],
        }


# ---------------------------------------------------------------------------
# TRC


def _fmt(o) -> str:
    if isinstance(o, AttrRef):
        return f"{o.var}.{o.attr}"
    return repr(o.value)


def _pred_text(p: Predicate) -> str:
    return f"{_fmt(p.left)} {p.op} {_fmt(p.right)}"


def _trc_violations(q: TrcQuery) -> list[Violation]:
    out: list[Violation] = []
    out_name = q.output.name if q.output else None
    linked_attrs: set[str] = set()
    root_vars = set(q.body.variables)
    if q.output is not None:
        for col in q.output.columns:
            if col.source is not None and col.source.var not in root_vars:
                out.append(
                    Violation(
                        "unsafe",
                        f"output attribute {col.name} must be linked to a root-scope table",
                        col.source.span,
                    )
                )

    def visit(scope: Scope, visible: frozenset, region: frozenset, depth: int):
        names = [x.var for x in scope.quantified]
        if out_name in names:
            out.append(Violation("unscoped", f"table variable {out_name} shadows the output", None))
        visible = visible | set(names)
        region = region | set(names)
        for c in scope.conjuncts:
            if isinstance(c, Predicate):
                table_refs = []
                for r in c.refs():
                    if r.var == out_name:
                        linked = q.output is not None and all(
                            col.source is None for col in q.output.columns if col.name == r.attr
                        )
                        if linked and depth == 0 and c.op == "=":
                            linked_attrs.add(r.attr)
                        else:
                            out.append(
                                Violation(
                                    "unsafe",
                                    f"output reference {r} outside an equality link of the root scope",
                                    c.span,
                                )
                            )
                        continue
                    if r.var not in visible:
                        out.append(Violation("unscoped", f"unscoped variable {r.var}", r.span or c.span))
                    table_refs.append(r)
                if not any(r.var in region for r in table_refs):
                    out.append(
                        Violation(
                            "unguarded",
                            f"predicate {_pred_text(c)} has no attribute of a table quantified in its negation scope",
                            c.span,
                        )
                    )
            elif isinstance(c, Negation):
                visit(c.scope, visible, frozenset(), depth + 1)
            elif isinstance(c, Exists):
                out.append(
                    Violation("non-canonical", "quantifier not at the start of a negation scope", c.span)
                )
                visit(c.scope, visible, region, depth)
            elif isinstance(c, Disjunction):
                out.append(Violation("disjunction", "disjunction", c.span))
                for b in c.branches:
                    visit(b, visible, region, depth)

    visit(q.body, frozenset(), frozenset(), 0)
    if q.output is not None:
        for col in q.output.columns:
            if col.source is None and col.name not in linked_attrs:
                out.append(Violation("unsafe", f"output attribute {col.name} has no equality link", None))
    return out


def check_guarded(q: TrcQuery | sql.SqlQuery, schema=None) -> FragmentReport:
    """Report every predicate lacking a guard in its innermost negation scope."""
    if isinstance(q, TrcQuery):
        trc, dialect = q, "trc"
    else:
        from ..translate.sql_trc import sql_to_trc_raw

        trc, dialect = sql_to_trc_raw(q, schema), "sql"
    found = [v for v in _trc_violations(trc) if v.kind == "unguarded"]
    return FragmentReport(dialect, tuple(found))


# ---------------------------------------------------------------------------
# Canonicalization


def _rename_free(scope: Scope, old: str, new: str) -> Scope:
    """Rename free occurrences of variable ``old`` in ``scope`` (respecting shadowing)."""
    if old in scope.variables:
        return scope

    def operand(o):
        if isinstance(o, AttrRef) and o.var == old:
            return replace(o, var=new)
        return o

    conj = []
    for c in scope.conjuncts:
        if isinstance(c, Predicate):
            c = replace(c, left=operand(c.left), right=operand(c.right))
        elif isinstance(c, (Negation, Exists)):
            c = replace(c, scope=_rename_free(c.scope, old, new))
        else:
            c = replace(c, branches=tuple(_rename_free(b, old, new) for b in c.branches))
        conj.append(c)
    return Scope(scope.quantified, tuple(conj))


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    k = 2
    while f"{name}{k}" in taken:
        k += 1
    return f"{name}{k}"


def _canon_scope(scope: Scope, visible: set[str]) -> Scope:
    quants = list(scope.quantified)
    taken = set(visible) | {x.var for x in quants}
    conj: list = []
    for c in scope.conjuncts:
        if isinstance(c, Predicate):
            conj.append(c)
        elif isinstance(c, Negation):
            conj.append(replace(c, scope=_canon_scope(c.scope, taken)))
        elif isinstance(c, Disjunction):
            conj.append(replace(c, branches=tuple(_canon_scope(b, taken) for b in c.branches)))
        else:
            inner = _canon_scope(c.scope, taken)
            body = Scope((), inner.conjuncts)
            for quant in inner.quantified:
                new = _fresh(quant.var, taken)
                if new != quant.var:
                    body = _rename_free(body, quant.var, new)
                quants.append(replace(quant, var=new))
                taken.add(new)
            conj.extend(body.conjuncts)
    return Scope(tuple(quants), tuple(conj))


def lift_output_links(q: TrcQuery) -> TrcQuery:
    """Move root-scope ``q.A = r.A`` predicates into the structural output linkage."""
    if q.output is None or all(c.source is not None for c in q.output.columns):
        return q
    name = q.output.name
    root_vars = set(q.body.variables)
    conj = list(q.body.conjuncts)
    cols = []
    for col in q.output.columns:
        if col.source is not None:
            cols.append(col)
            continue
        source = None
        for i, c in enumerate(conj):
            if not isinstance(c, Predicate) or c.op != "=":
                continue
            sides = (c.left, c.right)
            for a, b in (sides, sides[::-1]):
                if (
                    isinstance(a, AttrRef)
                    and a.var == name
                    and a.attr == col.name
                    and isinstance(b, AttrRef)
                    and b.var in root_vars
                ):
                    source = b
                    break
            if source is not None:
                del conj[i]
                break
        cols.append(OutputColumn(col.name, source))
    return TrcQuery(Output(name, tuple(cols)), Scope(q.body.quantified, tuple(conj)))


def canonicalize_trc(q: TrcQuery) -> TrcQuery:
    """Hoist every quantifier to the start of its query or negation scope.

    Hoisted variables that clash with a visible name get a numeric suffix.
    Raises :class:`FragmentError` on references to unscoped variables.
    """
    unscoped = [v for v in _trc_violations(q) if v.kind == "unscoped"]
    if unscoped:
        raise FragmentError(unscoped[0].message)
    visible = {q.output.name} if q.output else set()
    body = _canon_scope(q.body, visible)
    return lift_output_links(TrcQuery(q.output, body))


# ---------------------------------------------------------------------------
# classify


def classify_trc(q: TrcQuery) -> FragmentReport:
    return FragmentReport("trc", tuple(_trc_violations(q)))


def classify_sql(q: sql.SqlQuery, schema=None) -> FragmentReport:
    from ..translate.sql_trc import sql_to_trc_raw

    found: list[Violation] = []
    if isinstance(q, sql.Union_):
        found.append(Violation("disjunction", "UNION", q.span))

    def cond(c):
        if isinstance(c, sql.OrCond):
            found.append(Violation("disjunction", "OR in predicate", c.span))
        elif isinstance(c, sql.ExistsCond) and not c.negated:
            found.append(Violation("non-canonical", "EXISTS subquery can be unnested", c.span))
        elif isinstance(c, sql.InCond):
            found.append(Violation("non-canonical", "membership subquery", c.span))
        elif isinstance(c, sql.QuantifiedCond):
            found.append(Violation("non-canonical", "quantified subquery", c.span))
        if isinstance(c, sql.NotGroup):
            for x in c.conditions:
                cond(x)
        if isinstance(c, sql.OrCond):
            for b in c.branches:
                for x in b:
                    cond(x)

    for s in sql.iter_selects(q):
        for c in s.where:
            cond(c)
    if isinstance(q, sql.BooleanSelect):
        for c in q.conditions:
            cond(c)
    try:
        trc = sql_to_trc_raw(q, schema)
    except FragmentError as exc:
        found.append(Violation("unscoped", str(exc), None))
    else:
        found.extend(v for v in _trc_violations(trc) if v.kind in ("unguarded", "unscoped", "unsafe"))
    return FragmentReport("sql", tuple(found))


def classify_datalog(p: dl.Program) -> FragmentReport:
    found: list[Violation] = []
    heads: dict[str, int] = {}
    for r in p.rules:
        heads[r.head.predicate] = heads.get(r.head.predicate, 0) + 1
    for name, n in heads.items():
        if n > 1:
            span = p.rules_for(name)[1].span
            found.append(Violation("idb-redefined", f"IDB {name} heads {n} rules", span))
    uses: dict[str, int] = {}
    for r in p.rules:
        for a in dl.body_atoms(r):
            if a.predicate in heads:
                uses[a.predicate] = uses.get(a.predicate, 0) + 1
                if uses[a.predicate] == 2:
                    found.append(Violation("idb-reused", f"IDB {a.predicate} used more than once", a.span))
    # recursion: depth-first search on the IDB dependency graph
    deps = {name: set() for name in heads}
    for r in p.rules:
        for a in dl.body_atoms(r):
            if a.predicate in heads:
                deps[r.head.predicate].add(a.predicate)
    state: dict[str, int] = {}

    def dfs(n: str) -> bool:
        state[n] = 1
        for m in deps[n]:
            if state.get(m) == 1 or (m not in state and dfs(m)):
                return True
        state[n] = 2
        return False

    for n in heads:
        if n not in state and dfs(n):
            found.append(Violation("recursion", f"recursive dependency through {n}", None))
            break
    roots = [n for n in heads if n not in uses]
    if len(roots) != 1:
        found.append(Violation("unsafe", f"expected one answer predicate, found {roots}", None))
    for r in p.rules:
        bound = {v.name for a in r.positive() for v in dl.term_vars(a.terms)}
        places = [("head", r.head.terms, r.head.span)]
        places += [("negated atom", a.terms, a.span) for a in r.negative()]
        places += [("built-in", (b.left, b.right), b.span) for b in r.builtins()]
        for what, terms, span in places:
            for v in dl.term_vars(terms):
                if v.name not in bound:
                    found.append(
                        Violation("unsafe", f"variable {v.name} in {what} not bound by a positive atom", v.span or span)
                    )
        for b in r.builtins():
            if not any(True for _ in dl.term_vars((b.left, b.right))):
                found.append(Violation("unguarded", "built-in without variables", b.span))
    return FragmentReport("datalog", tuple(found))


def classify_ra(e: ra.RaExpr, schema=None) -> FragmentReport:
    found: list[Violation] = []
    for n in ra.walk(e):
        if isinstance(n, ra.Union_):
            found.append(Violation("disjunction", "union operator", n.span))
        if isinstance(n, ra.Select):
            for c in n.conditions:
                if isinstance(c, ra.OrCondition):
                    found.append(Violation("disjunction", "disjunctive selection", c.span))
    if schema is not None:
        from ..eval.ra import ra_columns

        try:
            ra_columns(e, schema)
        except Exception as exc:  # schema problems surface as safety violations
            found.append(Violation("unsafe", str(exc), None))
    return FragmentReport("ra", tuple(found))


def classify(q, schema=None) -> FragmentReport:
    """Membership of ``q`` (any dialect) in its non-disjunctive fragment."""
    if isinstance(q, TrcQuery):
        return classify_trc(q)
    if isinstance(q, (sql.Select, sql.BooleanSelect, sql.Union_)):
        return classify_sql(q, schema)
    if isinstance(q, dl.Program):
        return classify_datalog(q)
    if isinstance(q, ra.BINARY + (ra.Relation, ra.Project, ra.Select, ra.Rename)):
        return classify_ra(q, schema)
    raise TypeError(f"not a query: {type(q).__name__}")
