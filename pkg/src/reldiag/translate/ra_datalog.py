"""RA* expressions to Datalog* programs and back.

RA to Datalog merges operators into one rule body where possible: products
and joins concatenate bodies, selections add built-ins (equalities unify
variables), projections drop head columns. The right operand of a
difference or antijoin becomes its own IDB, except that a difference with a
bare relation negates that relation directly.

Datalog to RA names every variable's column after the attribute that first
binds it, so natural joins and antijoins line up on variables. Without the
antijoin operator a negated atom that does not cover all positive variables
needs the completion ``P - (pi_z P x N)``, which repeats ``P`` and therefore
loses the query pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..ast.common import FLIPPED, Const
from ..ast.datalog import Atom, Builtin, NegatedAtom, Program, Rule, Var, anonymize
from ..ast.ra import (
    Antijoin,
    ColRef,
    Condition,
    Join,
    Minus,
    OrCondition,
    Product,
    Project,
    Relation,
    Rename,
    Select,
    Union_,
    leaves,
)
from ..ast.checks import classify_datalog
from ..catalog import Schema
from ..errors import FragmentError, TranslationError
from ..eval.ra import Column, alignment, find_column, no_duplicates, shared_names
from .trace import TraceLog, TranslationTrace


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    k = 2
    while f"{name}{k}" in taken:
        k += 1
    return f"{name}{k}"


# ---------------------------------------------------------------------------
# RA to Datalog


@dataclass
class _Body:
    items: list
    origin: list  # leaf index of each item, None for non-EDB items
    terms: list
    cols: list[Column]

    def substitute(self, old: Var, new) -> None:
        def term(t):
            return new if t == old else t

        def item(b):
            if isinstance(b, Atom):
                return Atom(b.predicate, tuple(term(t) for t in b.terms))
            if isinstance(b, NegatedAtom):
                return NegatedAtom(item(b.atom))
            return Builtin(term(b.left), b.op, term(b.right))

        self.items = [item(b) for b in self.items]
        self.terms = [term(t) for t in self.terms]


class _RaToDatalog:
    def __init__(self, schema: Schema, log: TraceLog):
        self.schema = schema
        self.log = log
        self.rules: list[Rule] = []
        self.origins: list[list] = []
        self.vars: set[str] = set()
        self.idbs = set(schema.names) | {"Q"}
        self.count = 0
        self.leaf = 0

    def var(self, attr: str) -> Var:
        name = _fresh(attr.lower(), self.vars)
        self.vars.add(name)
        return Var(name)

    def emit(self, body: _Body, head_terms, name: str | None = None) -> str:
        if name is None:
            self.count += 1
            name = _fresh(f"I{self.count}", self.idbs)
            self.idbs.add(name)
        self.rules.append(Rule(Atom(name, tuple(head_terms)), tuple(body.items)))
        self.origins.append(list(body.origin))
        return name

    def condition(self, body: _Body, c) -> None:
        if isinstance(c, OrCondition):
            raise TranslationError("disjunctive selection is outside the fragment")
        left = body.terms[find_column(body.cols, c.left)]
        if isinstance(c.right, Const):
            body.items.append(Builtin(left, c.op, c.right))
            body.origin.append(None)
            return
        right = body.terms[find_column(body.cols, c.right)]
        if c.op == "=" and isinstance(left, Var) and isinstance(right, Var):
            if left != right:
                body.substitute(right, left)
            return
        body.items.append(Builtin(left, c.op, right))
        body.origin.append(None)

    def subtrahend(self, e) -> tuple[str, list[Column], int | None]:
        """Predicate for the right operand of a difference, with its leaf index if it is a base relation."""
        if isinstance(e, Relation):
            rel = self.schema.relation(e.name)
            q = e.alias or e.name
            idx = self.leaf
            self.leaf += 1
            return e.name, [Column(q, a.name, a.sort) for a in rel.attributes], idx
        inner = self.compile(e)
        name = self.emit(inner, inner.terms)
        self.log.step(f"right operand becomes IDB {name}", name)
        return name, inner.cols, None

    def compile(self, e) -> _Body:
        if isinstance(e, Relation):
            rel = self.schema.relation(e.name)
            q = e.alias or e.name
            terms = [self.var(a.name) for a in rel.attributes]
            idx = self.leaf
            self.leaf += 1
            return _Body(
                [Atom(e.name, tuple(terms))], [idx], terms, [Column(q, a.name, a.sort) for a in rel.attributes]
            )
        if isinstance(e, Project):
            body = self.compile(e.child)
            idx = [find_column(body.cols, c) for c in e.columns]
            body.terms = [body.terms[i] for i in idx]
            body.cols = [body.cols[i] for i in idx]
            no_duplicates(body.cols, "projection")
            return body
        if isinstance(e, Select):
            body = self.compile(e.child)
            for c in e.conditions:
                self.condition(body, c)
            return body
        if isinstance(e, Rename):
            body = self.compile(e.child)
            if e.relation is not None:
                body.cols = [Column(e.relation, c.name, c.sort) for c in body.cols]
            else:
                cols = list(body.cols)
                for ref, new in e.attributes:
                    i = find_column(body.cols, ref)
                    cols[i] = Column(cols[i].qualifier, new, cols[i].sort)
                body.cols = cols
            no_duplicates(body.cols, "rename")
            return body
        if isinstance(e, Union_):
            raise TranslationError("union is outside the fragment")
        if isinstance(e, (Minus, Antijoin)):
            return self.negation(e)
        left, right = self.compile(e.left), self.compile(e.right)
        body = _Body(left.items + right.items, left.origin + right.origin, left.terms + right.terms, left.cols + right.cols)
        if isinstance(e, Product) or e.conditions:
            no_duplicates(body.cols, "join")
            for c in getattr(e, "conditions", ()):
                self.condition(body, c)
            return body
        pairs = shared_names(left.cols, right.cols)
        n = len(left.cols)
        for i, j in pairs:
            a, b = body.terms[i], body.terms[n + j]
            if a != b:
                body.substitute(b, a)
        drop = {n + j for _, j in pairs}
        body.terms = [t for k, t in enumerate(body.terms) if k not in drop]
        body.cols = [c for k, c in enumerate(body.cols) if k not in drop]
        no_duplicates(body.cols, "natural join")
        return body

    def negation(self, e) -> _Body:
        body = self.compile(e.left)
        if isinstance(e, Minus):
            name, rcols, leaf = self.subtrahend(e.right)
            perm = alignment(body.cols, rcols, "difference")
            args = [None] * len(rcols)
            for i, j in enumerate(perm):
                args[j] = body.terms[i]
        else:
            if e.conditions:
                if any(isinstance(c, OrCondition) or c.op != "=" or isinstance(c.right, Const) for c in e.conditions):
                    raise TranslationError("only equality antijoins have a Datalog* counterpart")
                inner = self.compile(e.right)
                pairs = []
                for c in e.conditions:
                    both = body.cols + inner.cols
                    a, b = find_column(both, c.left), find_column(both, c.right)
                    if a >= len(body.cols):
                        a, b = b, a
                    pairs.append((a, b - len(body.cols)))
            else:
                inner = self.compile(e.right)
                pairs = shared_names(body.cols, inner.cols)
            head = [inner.terms[j] for _, j in pairs]
            name = self.emit(inner, head)
            self.log.step(f"antijoin right operand becomes IDB {name}", name)
            leaf = None
            args = [body.terms[i] for i, _ in pairs]
        body.items.append(NegatedAtom(Atom(name, tuple(args))))
        body.origin.append(leaf)
        return body


def _tidy(rule: Rule) -> Rule:
    """Drop the numeric suffixes that kept variables apart across rules."""
    names: dict[str, str] = {}
    taken: set[str] = set()

    def term(t):
        if not isinstance(t, Var) or t.anonymous:
            return t
        if t.name not in names:
            names[t.name] = _fresh(t.name.rstrip("0123456789") or t.name, taken)
            taken.add(names[t.name])
        return Var(names[t.name])

    def atom(a: Atom) -> Atom:
        return Atom(a.predicate, tuple(term(t) for t in a.terms))

    head = atom(rule.head)
    body = []
    for b in rule.body:
        if isinstance(b, Atom):
            body.append(atom(b))
        elif isinstance(b, NegatedAtom):
            body.append(NegatedAtom(atom(b.atom)))
        else:
            body.append(Builtin(term(b.left), b.op, term(b.right)))
    return Rule(head, tuple(body))


def ra_to_datalog(e, schema: Schema) -> tuple[Program, TranslationTrace]:
    """Datalog* program equivalent to the RA* expression ``e`` (antijoins allowed)."""
    log = TraceLog()
    conv = _RaToDatalog(schema, log)
    body = conv.compile(e)
    conv.emit(body, body.terms, "Q")
    log.step("answer rule Q collects the top-level operator")
    rules = tuple(_tidy(anonymize(r)) for r in conv.rules)
    program = Program(rules)
    positions = [o for origin in conv.origins for o in origin if o is not None]
    corr = [0] * len(positions)
    for pos, leaf in enumerate(positions):
        corr[leaf] = pos
    return program, log.trace("ra", "datalog", corr)


# ---------------------------------------------------------------------------
# Datalog to RA


class _DatalogToRa:
    def __init__(self, p: Program, schema: Schema, antijoin: bool, log: TraceLog):
        self.p = p
        self.schema = schema
        self.antijoin = antijoin
        self.log = log
        self.idbs = set(p.idbs)
        self.rule_index = {id(r): i for i, r in enumerate(p.rules)}
        self.origin: dict[int, tuple[int, int]] = {}  # id(Relation) -> (rule, item)
        self.preserving = True

    def rule(self, name: str) -> Rule:
        rules = self.p.rules_for(name)
        if len(rules) != 1:
            raise FragmentError(f"IDB {name} must head exactly one rule")
        return rules[0]

    def source(self, a: Atom, rule: Rule, item: int):
        """Expression for an atom's predicate and its column names."""
        if a.predicate in self.idbs:
            expr, names = self.expr(self.rule(a.predicate))
        else:
            rel = self.schema.relation(a.predicate)
            expr = Relation(a.predicate)
            self.origin[id(expr)] = (self.rule_index[id(rule)], item)
            names = list(rel.attribute_names)
        if len(names) != len(a.terms):
            raise FragmentError(f"{a.predicate} used with {len(a.terms)} arguments, expected {len(names)}")
        return expr, names

    def atom(self, a: Atom, rule: Rule, item: int, names: dict[str, str], taken: set[str], bind: bool):
        """Expression whose columns are the distinct variables of ``a``, named per ``names``."""
        expr, cols = self.source(a, rule, item)
        conds = []
        keep: list[int] = []
        first: dict[str, int] = {}
        for i, t in enumerate(a.terms):
            if isinstance(t, Const):
                conds.append(Condition(ColRef(None, cols[i]), "=", t))
            elif t.anonymous:
                continue
            elif t.name in first:
                conds.append(Condition(ColRef(None, cols[first[t.name]]), "=", ColRef(None, cols[i])))
            else:
                first[t.name] = i
                keep.append(i)
                if t.name not in names:
                    if not bind:
                        raise FragmentError(f"variable {t.name} in negated {a.predicate} is not bound")
                    names[t.name] = _fresh(cols[i], taken)
                    taken.add(names[t.name])
        if conds:
            expr = Select(tuple(conds), expr)
        if len(keep) != len(cols):
            expr = Project(tuple(ColRef(None, cols[i]) for i in keep), expr)
        renames = tuple(
            (ColRef(None, cols[i]), names[a.terms[i].name]) for i in keep if names[a.terms[i].name] != cols[i]
        )
        if renames:
            expr = Rename(renames, None, expr)
        return expr, [names[a.terms[i].name] for i in keep]

    def expr(self, rule: Rule):
        names: dict[str, str] = {}
        taken: set[str] = set()
        acc = None
        acc_cols: list[str] = []
        for i, b in enumerate(rule.body):
            if not isinstance(b, Atom):
                continue
            part, cols = self.atom(b, rule, i, names, taken, True)
            if acc is None:
                acc, acc_cols = part, cols
            elif set(cols) & set(acc_cols):
                acc = Join((), acc, part)
                acc_cols = acc_cols + [c for c in cols if c not in acc_cols]
            else:
                acc = Product(acc, part)
                acc_cols = acc_cols + cols
        if acc is None:
            raise TranslationError(f"rule for {rule.head.predicate} has no positive atom")
        positive = acc
        conds = []
        for b in rule.body:
            if isinstance(b, Builtin):
                left, op, right = b.left, b.op, b.right
                if isinstance(left, Const):
                    left, op, right = right, FLIPPED[op], left
                if isinstance(left, Const):
                    raise TranslationError("built-in between two constants")
                conds.append(
                    Condition(
                        ColRef(None, names[left.name]),
                        op,
                        right if isinstance(right, Const) else ColRef(None, names[right.name]),
                    )
                )
        for i, b in enumerate(rule.body):
            if not isinstance(b, NegatedAtom):
                continue
            part, cols = self.atom(b.atom, rule, i, names, taken, False)
            if self.antijoin:
                acc = Antijoin((), acc, part)
                continue
            z = [c for c in acc_cols if c not in cols]
            if z:
                self.preserving = False
                self.log.step(f"complete negated {b.atom.predicate} with the positive part", *z)
                part = Product(Project(tuple(ColRef(None, c) for c in z), positive), part)
            acc = Minus(acc, part)
        if conds:
            acc = Select(tuple(conds), acc)
        head = []
        for t in rule.head.terms:
            if isinstance(t, Const) or t.name not in names:
                raise TranslationError(f"head of {rule.head.predicate} must list variables bound in the body")
            head.append(names[t.name])
        if len(set(head)) != len(head):
            raise TranslationError(f"repeated head variable in {rule.head.predicate}")
        if head != acc_cols:
            acc = Project(tuple(ColRef(None, c) for c in head), acc)
        return acc, head


def datalog_to_ra(p: Program, schema: Schema, use_antijoin: bool = False) -> tuple:
    """RA* expression equivalent to the Datalog* program ``p``.

    With ``use_antijoin`` negated atoms become natural antijoins and the
    translation keeps the query pattern.
    """
    report = classify_datalog(p)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"program is outside the fragment: {v.message}")
    log = TraceLog()
    conv = _DatalogToRa(p, schema, use_antijoin, log)
    log.step("positive atoms joined left to right; negated atoms " + ("antijoined" if use_antijoin else "subtracted"))
    expr, _ = conv.expr(conv.rule(p.answer_predicate()))
    if not conv.preserving:
        log.note("difference completion repeats the positive part; not pattern-preserving")
        return expr, log.trace("datalog", "ra", None)
    order = {}
    idbs = set(p.idbs)
    for ri, r in enumerate(p.rules):
        for bi, b in enumerate(r.body):
            a = b.atom if isinstance(b, NegatedAtom) else b
            if isinstance(a, Atom) and a.predicate not in idbs:
                order[(ri, bi)] = len(order)
    leaf_pos = [conv.origin[id(x)] for x in leaves(expr)]
    corr = [0] * len(order)
    for pos, key in enumerate(leaf_pos):
        corr[order[key]] = pos
    return expr, log.trace("datalog", "ra", corr)
