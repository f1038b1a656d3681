"""Non-recursive Datalog with negation and built-in comparisons."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterator, Union

from ..errors import FragmentError, SourceSpan
from .common import Const, span_field


@dataclass(frozen=True)
class Var:
    name: str
    span: SourceSpan | None = span_field()

    @property
    def anonymous(self) -> bool:
        return self.name.startswith("_")


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[Term, ...]
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class NegatedAtom:
    atom: Atom
    span: SourceSpan | None = span_field()


@dataclass(frozen=True)
class Builtin:
    left: Term
    op: str
    right: Term
    span: SourceSpan | None = span_field()


BodyItem = Union[Atom, NegatedAtom, Builtin]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[BodyItem, ...]
    span: SourceSpan | None = span_field()

    def positive(self) -> list[Atom]:
        return [b for b in self.body if isinstance(b, Atom)]

    def negative(self) -> list[Atom]:
        return [b.atom for b in self.body if isinstance(b, NegatedAtom)]

    def builtins(self) -> list[Builtin]:
        return [b for b in self.body if isinstance(b, Builtin)]


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]

    @property
    def idbs(self) -> list[str]:
        seen: list[str] = []
        for r in self.rules:
            if r.head.predicate not in seen:
                seen.append(r.head.predicate)
        return seen

    def rules_for(self, predicate: str) -> list[Rule]:
        return [r for r in self.rules if r.head.predicate == predicate]

    def answer_predicate(self) -> str:
        """The IDB that no rule body references (the query's output)."""
        used = {a.predicate for r in self.rules for a in body_atoms(r)}
        roots = [p for p in self.idbs if p not in used]
        if len(roots) != 1:
            raise FragmentError(
                f"program must have exactly one unreferenced IDB, found {roots or 'none'}"
            )
        return roots[0]


def body_atoms(rule: Rule) -> Iterator[Atom]:
    for b in rule.body:
        if isinstance(b, Atom):
            yield b
        elif isinstance(b, NegatedAtom):
            yield b.atom


def edb_atoms(p: Program) -> list[Atom]:
    """EDB references (positive and negated) in rule order, then body order."""
    idbs = set(p.idbs)
    return [a for r in p.rules for a in body_atoms(r) if a.predicate not in idbs]


def term_vars(terms) -> Iterator[Var]:
    for t in terms:
        if isinstance(t, Var):
            yield t


def rule_vars(rule: Rule) -> list[Var]:
    out = list(term_vars(rule.head.terms))
    for b in rule.body:
        if isinstance(b, Atom):
            out.extend(term_vars(b.terms))
        elif isinstance(b, NegatedAtom):
            out.extend(term_vars(b.atom.terms))
        else:
            out.extend(term_vars((b.left, b.right)))
    return out


def anonymize(rule: Rule) -> Rule:
    """Rename variables occurring once in ``rule`` to ``_1, _2, ...`` in order of occurrence."""
    counts = Counter(v.name for v in rule_vars(rule))
    fresh: dict[str, str] = {}
    for v in rule_vars(rule):
        if counts[v.name] == 1:
            fresh[v.name] = f"_{len(fresh) + 1}"

    def term(t):
        if isinstance(t, Var) and t.name in fresh:
            return replace(t, name=fresh[t.name])
        return t

    def atom(a: Atom) -> Atom:
        return replace(a, terms=tuple(term(t) for t in a.terms))

    body = []
    for b in rule.body:
        if isinstance(b, Atom):
            body.append(atom(b))
        elif isinstance(b, NegatedAtom):
            body.append(replace(b, atom=atom(b.atom)))
        else:
            body.append(replace(b, left=term(b.left), right=term(b.right)))
    return replace(rule, head=atom(rule.head), body=tuple(body))


def anonymize_program(p: Program) -> Program:
    return Program(tuple(anonymize(r) for r in p.rules))


def rename_edbs(p: Program, names: list[str]) -> Program:
    """Replace the predicate of the i-th EDB reference by ``names[i]``."""
    idbs = set(p.idbs)
    it = iter(names)

    def atom(a: Atom) -> Atom:
        return a if a.predicate in idbs else replace(a, predicate=next(it))

    rules = []
    for r in p.rules:
        body = []
        for b in r.body:
            if isinstance(b, Atom):
                b = atom(b)
            elif isinstance(b, NegatedAtom):
                b = replace(b, atom=atom(b.atom))
            body.append(b)
        rules.append(replace(r, body=tuple(body)))
    return Program(tuple(rules))


def constants(p: Program) -> set:
    out = set()
    for r in p.rules:
        for a in [r.head, *body_atoms(r)]:
            out.update(t.value for t in a.terms if isinstance(t, Const))
        for b in r.builtins():
            out.update(t.value for t in (b.left, b.right) if isinstance(t, Const))
    return out
