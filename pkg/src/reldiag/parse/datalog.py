"""Parser and printer for non-recursive Datalog with negation.

    program ::= rule {rule}
    rule    ::= atom [':-' literal {',' literal}] '.'
    literal ::= atom | 'not' atom | term op term
    atom    ::= Pred ['(' [term {',' term}] ')']
    term    ::= variable | '_' | integer | 'string'

``_`` becomes a fresh variable; variables used once in a rule print as ``_``.
"""

from __future__ import annotations

from collections import Counter

from ..ast.common import Const, format_literal
from ..ast.datalog import Atom, Builtin, NegatedAtom, Program, Rule, Var, anonymize, rule_vars
from .lexer import TokenStream


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, comments=("--", "%", "#"))
        self.fresh = 0

    def program(self) -> Program:
        rules = []
        while self.ts.peek().kind != "eof":
            rules.append(self.rule())
        if not rules:
            raise self.ts.error("expected at least one rule")
        return Program(tuple(rules))

    def rule(self) -> Rule:
        ts = self.ts
        start = ts.peek()
        self.fresh = 0
        head = self.atom()
        body = []
        if ts.accept_sym(":-"):
            body.append(self.literal())
            while ts.accept_sym(","):
                body.append(self.literal())
        ts.expect_sym(".")
        return anonymize(Rule(head, tuple(body), ts.span_from(start)))

    def literal(self):
        ts = self.ts
        start = ts.peek()
        if ts.at_keyword("not") and ts.peek(1).kind == "ident":
            ts.advance()
            return NegatedAtom(self.atom(), ts.span_from(start))
        if ts.peek().kind == "ident" and not ts.at_op(1):
            return self.atom()
        left = self.term()
        op = ts.expect_op().value
        right = self.term()
        return Builtin(left, op, right, ts.span_from(start))

    def atom(self) -> Atom:
        ts = self.ts
        name = ts.expect_ident("predicate name", ("not",))
        terms = []
        if ts.accept_sym("("):
            if not ts.at_sym(")"):
                terms.append(self.term())
                while ts.accept_sym(","):
                    terms.append(self.term())
            ts.expect_sym(")")
        return Atom(name.text, tuple(terms), ts.span_from(name))

    def term(self):
        ts = self.ts
        tok = ts.peek()
        if tok.kind in ("int", "string"):
            ts.advance()
            return Const(tok.value, tok.span)
        ident = ts.expect_ident("term", ("not",))
        if ident.text == "_":
            self.fresh += 1
            return Var(f"_anon{self.fresh}", ident.span)
        return Var(ident.text, ident.span)


def parse_datalog(text: str) -> Program:
    return _Parser(text).program()


def _term(t, counts: Counter) -> str:
    if isinstance(t, Const):
        return format_literal(t.value)
    if t.anonymous and counts[t.name] == 1:
        return "_"
    return t.name


def _atom(a: Atom, counts: Counter) -> str:
    if not a.terms:
        return a.predicate
    return f"{a.predicate}({', '.join(_term(t, counts) for t in a.terms)})"


def print_rule(r: Rule) -> str:
    counts = Counter(v.name for v in rule_vars(r))
    head = _atom(r.head, counts)
    if not r.body:
        return f"{head}."
    parts = []
    for b in r.body:
        if isinstance(b, Atom):
            parts.append(_atom(b, counts))
        elif isinstance(b, NegatedAtom):
            parts.append(f"not {_atom(b.atom, counts)}")
        else:
            parts.append(f"{_term(b.left, counts)} {b.op} {_term(b.right, counts)}")
    return f"{head} :- {', '.join(parts)}."


def print_datalog(p: Program) -> str:
    return "\n".join(print_rule(r) for r in p.rules)
