"""Datalog* programs to TRC* and back.

Going to TRC, every IDB is inlined at its single use: a positive IDB atom
merges its rule body into the current scope, a negated one becomes a
negation scope. Going to Datalog, every negation scope becomes a rule whose
head carries the outer attributes the scope refers to; when such an
attribute is not bound by the scope's own tables, the outer table is copied
into the rule as a guard (which breaks pattern preservation).
"""

from __future__ import annotations

from ..ast.checks import classify_datalog, classify_trc, lift_output_links
from ..ast.common import Const
from ..ast.datalog import Atom, Builtin, NegatedAtom, Program, Rule, Var
from ..ast.trc import (
    AttrRef,
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
from ..errors import FragmentError, TranslationError
from ..parse.trc import RESERVED
from .trace import TraceLog, TranslationTrace


def _fresh(name: str, taken: set[str]) -> str:
    if name not in taken:
        return name
    k = 2
    while f"{name}{k}" in taken:
        k += 1
    return f"{name}{k}"


# ---------------------------------------------------------------------------
# Datalog to TRC


class _Inliner:
    def __init__(self, p: Program, schema: Schema):
        self.p = p
        self.schema = schema
        self.idbs = set(p.idbs)
        self.taken = set(RESERVED) | {"q"}
        self.origin: dict[str, tuple[int, int]] = {}  # TRC variable -> (rule, body item)
        self.index = {id(r): i for i, r in enumerate(p.rules)}

    def rule(self, name: str) -> Rule:
        rules = self.p.rules_for(name)
        if len(rules) != 1:
            raise FragmentError(f"IDB {name} must head exactly one rule")
        return rules[0]

    def quantify(self, a: Atom, rule: Rule, item: int) -> tuple[Quantifier, list[AttrRef]]:
        rel = self.schema.relation(a.predicate)
        if rel.arity != len(a.terms):
            raise FragmentError(f"{a.predicate} used with {len(a.terms)} arguments, expected {rel.arity}")
        var = _fresh(a.predicate.lower(), self.taken)
        self.taken.add(var)
        self.origin[var] = (self.index[id(rule)], item)
        return Quantifier(var, a.predicate), [AttrRef(var, n) for n in rel.attribute_names]

    def body(self, rule: Rule, bindings: dict[str, object]) -> tuple[list, list, list, dict]:
        """Quantifiers, predicates and negations of ``rule`` plus its variable environment.

        ``bindings`` maps head variables to operands of the calling scope;
        they are joined to the first local occurrence by an equality.
        """
        quants: list[Quantifier] = []
        preds: list = []
        negs: list = []
        env: dict[str, object] = {}

        def bind(term, ref: AttrRef) -> None:
            if isinstance(term, Const):
                preds.append(Predicate(ref, "=", term))
            elif term.anonymous and term.name not in bindings:
                return
            elif term.name in env:
                preds.append(Predicate(ref, "=", env[term.name]))
            else:
                env[term.name] = ref
                if term.name in bindings:
                    preds.append(Predicate(ref, "=", bindings[term.name]))

        for i, item in enumerate(rule.body):
            if isinstance(item, Atom) and item.predicate not in self.idbs:
                quant, refs = self.quantify(item, rule, i)
                quants.append(quant)
                for t, ref in zip(item.terms, refs):
                    bind(t, ref)
        for item in rule.body:
            if isinstance(item, Atom) and item.predicate in self.idbs:
                inner = self.rule(item.predicate)
                q2, p2, n2, env2 = self.body(inner, self.args(inner, item, env, positive=True))
                quants.extend(q2)
                preds.extend(p2)
                negs.extend(n2)
                for t, h in zip(item.terms, inner.head.terms):
                    if isinstance(t, Var) and t.name not in env and isinstance(h, Var) and h.name in env2:
                        env[t.name] = env2[h.name]
        for i, item in enumerate(rule.body):
            if isinstance(item, Builtin):
                preds.append(Predicate(self.operand(item.left, env), item.op, self.operand(item.right, env)))
            elif isinstance(item, NegatedAtom):
                negs.append(Negation(self.negated(item.atom, rule, i, env)))
        missing = [v for v in bindings if v not in env and not v.startswith("_")]
        for v in missing:
            raise FragmentError(f"head variable {v} of {rule.head.predicate} is not bound by a positive atom")
        return quants, preds, negs, env

    def args(self, inner: Rule, call: Atom, env: dict, positive: bool = False) -> dict:
        """Operands passed to the head variables of ``inner``; a positive call may leave some unbound."""
        if len(inner.head.terms) != len(call.terms):
            raise FragmentError(f"{call.predicate} used with the wrong number of arguments")
        out = {}
        for h, t in zip(inner.head.terms, call.terms):
            if not isinstance(h, Var):
                raise TranslationError(f"constant in the head of {call.predicate} is not supported")
            if h.name in out:
                raise TranslationError(f"repeated head variable {h.name} in {call.predicate} is not supported")
            if isinstance(t, Const):
                out[h.name] = t
            elif t.name in env:
                out[h.name] = env[t.name]
            elif not (t.anonymous or positive):
                raise FragmentError(f"variable {t.name} in {call.predicate} is not bound by a positive atom")
        return out

    def operand(self, t, env: dict):
        if isinstance(t, Const):
            return t
        if t.name not in env:
            raise FragmentError(f"variable {t.name} is not bound by a positive atom")
        return env[t.name]

    def negated(self, a: Atom, rule: Rule, item: int, env: dict) -> Scope:
        if a.predicate in self.idbs:
            inner = self.rule(a.predicate)
            quants, preds, negs, _ = self.body(inner, self.args(inner, a, env))
            return Scope(tuple(quants), tuple(preds + negs))
        quant, refs = self.quantify(a, rule, item)
        preds = []
        for t, ref in zip(a.terms, refs):
            if isinstance(t, Const):
                preds.append(Predicate(ref, "=", t))
            elif not t.anonymous or t.name in env:
                preds.append(Predicate(ref, "=", self.operand(t, env)))
        return Scope((quant,), tuple(preds))


def datalog_to_trc(p: Program, schema: Schema) -> tuple[TrcQuery, TranslationTrace]:
    """TRC* query equivalent to the Datalog* program ``p`` (IDBs inlined)."""
    report = classify_datalog(p)
    if not report.non_disjunctive:
        v = report.violations[0]
        raise TranslationError(f"program is outside the fragment: {v.message}")
    conv = _Inliner(p, schema)
    log = TraceLog()
    answer = p.answer_predicate()
    root = conv.rule(answer)
    quants, preds, negs, env = conv.body(root, {})
    log.step("positive EDB atoms become table variables", *conv.origin)
    log.step("negated atoms and IDBs become nested negation scopes")
    output = None
    if root.head.terms:
        names: set[str] = set()
        cols = []
        for t in root.head.terms:
            if isinstance(t, Const) or t.name not in env:
                raise TranslationError("answer head terms must be variables bound by positive atoms")
            ref = env[t.name]
            name = _fresh(ref.attr, names)
            names.add(name)
            cols.append(OutputColumn(name, ref))
        output = Output("q", tuple(cols))
        log.step("head variables become output attributes", *(c.name for c in cols))
    q = TrcQuery(output, Scope(tuple(quants), tuple(preds + negs)))
    position = {x.var: i for i, x in enumerate(quantifiers(q))}
    by_origin = {o: v for v, o in conv.origin.items()}
    corr = []
    idbs = set(p.idbs)
    for ri, r in enumerate(p.rules):
        for bi, item in enumerate(r.body):
            a = item.atom if isinstance(item, NegatedAtom) else item
            if isinstance(a, Atom) and a.predicate not in idbs:
                corr.append(position[by_origin[(ri, bi)]])
    return q, log.trace("datalog", "trc", corr)


# ---------------------------------------------------------------------------
# TRC to Datalog


def _free_refs(scope: Scope) -> list[AttrRef]:
    """Attribute references in ``scope`` to variables bound outside it, first occurrence order."""
    out: list[AttrRef] = []

    def visit(s: Scope, bound: frozenset) -> None:
        bound = bound | set(s.variables)
        for c in s.conjuncts:
            if isinstance(c, Predicate):
                for r in c.refs():
                    if r.var not in bound and (r.var, r.attr) not in {(x.var, x.attr) for x in out}:
                        out.append(AttrRef(r.var, r.attr))
            elif isinstance(c, Negation):
                visit(c.scope, bound)

    visit(scope, frozenset())
    return out


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


class _RuleBuilder:
    """Emits one rule per scope, children before parents.

    Attribute occurrences are keyed by (quantifier preorder index, attribute);
    equalities merge keys into one Datalog variable.
    """

    def __init__(self, schema: Schema, log: TraceLog):
        self.schema = schema
        self.log = log
        self.rules: list[Rule] = []
        self.origin: list[list[int | None]] = []  # per rule: quantifier index of each body item
        self.taken = set(schema.names) | {"Q"}
        self.count = 0
        self.next_quant = 0
        self.guarded = False

    def idb_name(self) -> str:
        self.count += 1
        name = _fresh(f"I{self.count}", self.taken)
        self.taken.add(name)
        return name

    def scope_rule(self, scope: Scope, params: list[tuple], outer: dict, head_refs: list | None = None) -> Atom:
        """Emit the rule for ``scope`` and return its head atom.

        ``params`` are the keys of the outer attributes the scope refers to;
        ``outer`` maps visible outer variables to (quantifier index, relation).
        """
        env = dict(outer)
        local = []
        for x in scope.quantified:
            env[x.var] = (self.next_quant, x.relation)
            local.append((self.next_quant, x.relation))
            self.next_quant += 1

        def key(ref: AttrRef) -> tuple:
            return (env[ref.var][0], ref.attr)

        uf = _UnionFind()
        builtins = []
        for c in scope.conjuncts:
            if isinstance(c, Predicate):
                if c.op == "=" and all(isinstance(o, AttrRef) for o in (c.left, c.right)):
                    uf.union(key(c.left), key(c.right))
                else:
                    builtins.append(c)
        atoms = []  # (relation, keys, quantifier index or None for guards)
        for qi, rel in local:
            atoms.append((rel, [(qi, a) for a in self.schema.relation(rel).attribute_names], qi))
        bound = {uf.find(k) for _, keys, _ in atoms for k in keys}
        guards = []
        for qi, rel in dict.fromkeys((k[0], r) for k in params for r in [_relation_of(outer, k[0])]):
            missing = [k for k in params if k[0] == qi and uf.find(k) not in bound]
            if not missing:
                continue
            keys = [(qi, a) for a in self.schema.relation(rel).attribute_names]
            guards.append((rel, keys, None))
            bound |= {uf.find(k) for k in keys}
            self.guarded = True
            self.log.step(f"guard: copy the outer table {rel} into a nested rule", *(a for _, a in missing))
        children = []
        for c in scope.conjuncts:
            if isinstance(c, Negation):
                inner = [key(r) for r in _free_refs(c.scope)]
                children.append((inner, self.scope_rule(c.scope, inner, env)))
        all_atoms = guards + atoms
        head_keys = [key(r) for r in head_refs] if head_refs is not None else list(params)
        counts: dict = {}
        for _, keys, _ in all_atoms:
            for k in keys:
                counts[uf.find(k)] = counts.get(uf.find(k), 0) + 1
        mentioned = {uf.find(k) for k in head_keys}
        mentioned |= {uf.find(key(r)) for c in builtins for r in c.refs()}
        mentioned |= {uf.find(k) for keys, _ in children for k in keys}
        names: dict = {}
        used: set[str] = set()

        def var(k) -> Var:
            root = uf.find(k)
            if root not in names:
                names[root] = _fresh(k[1].lower(), used)
                used.add(names[root])
            return Var(names[root])

        anon = 0
        body: list = []
        origin: list[int | None] = []
        for rel, keys, qi in all_atoms:
            terms = []
            for k in keys:
                if counts[uf.find(k)] == 1 and uf.find(k) not in mentioned:
                    anon += 1
                    terms.append(Var(f"_{anon}"))
                else:
                    terms.append(var(k))
            body.append(Atom(rel, tuple(terms)))
            origin.append(qi)
        for c in builtins:
            left = var(key(c.left)) if isinstance(c.left, AttrRef) else c.left
            right = var(key(c.right)) if isinstance(c.right, AttrRef) else c.right
            body.append(Builtin(left, c.op, right))
            origin.append(None)
        for keys, head in children:
            body.append(NegatedAtom(Atom(head.predicate, tuple(var(k) for k in keys))))
            origin.append(None)
        name = "Q" if head_refs is not None else self.idb_name()
        head = Atom(name, tuple(var(k) for k in head_keys))
        self.rules.append(Rule(head, tuple(body)))
        self.origin.append(origin)
        return head


def _relation_of(outer: dict, qi: int) -> str:
    return next(rel for i, rel in outer.values() if i == qi)


def trc_to_datalog(q: TrcQuery, schema: Schema) -> tuple[Program, TranslationTrace]:
    """Datalog* program equivalent to a canonical TRC* query, one rule per scope.

    IDBs are named I1, I2, ... in scope postorder; the answer predicate is Q.
    """
    q = lift_output_links(q)
    report = classify_trc(q)
    if not report.ok:
        v = report.violations[0]
        raise TranslationError(f"query is outside the fragment ({v.kind}): {v.message}")
    log = TraceLog()
    log.step("one rule per negation scope, innermost first")
    b = _RuleBuilder(schema, log)
    head_refs = [c.source for c in q.output.columns] if q.output is not None else []
    b.scope_rule(q.body, [], {}, head_refs)
    program = Program(tuple(b.rules))
    if b.guarded:
        log.note("guard tables inserted; translation is not pattern-preserving")
        return program, log.trace("trc", "datalog", None)
    corr = [0] * b.next_quant
    pos = 0
    for origin in b.origin:
        for o in origin:
            if o is not None:
                corr[o] = pos
                pos += 1
    return program, log.trace("trc", "datalog", corr)
