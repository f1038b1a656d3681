"""Concrete syntax for tuple relational calculus.

    query   ::= '{' name '(' [attr {',' attr}] ')' '|' formula '}' | formula
    formula ::= conj {'or' conj}
    conj    ::= unit {'and' unit}
    unit    ::= 'not' '(' formula ')' | 'exists' quants ['[' [formula] ']']
              | '(' formula ')' | 'true' | operand op operand
    quants  ::= var 'in' Rel {',' ['exists'] var 'in' Rel}
    operand ::= var '.' attr | integer | 'string'
"""

from __future__ import annotations

from ..ast.checks import lift_output_links
from ..ast.common import Const, format_literal
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
from .lexer import TokenStream

RESERVED = ("exists", "in", "not", "and", "or", "true")


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, comments=("--", "#"))

    def query(self) -> TrcQuery:
        ts = self.ts
        output = None
        if ts.accept_sym("{"):
            name = ts.expect_ident("output name", RESERVED).text
            ts.expect_sym("(")
            attrs: list[str] = []
            if not ts.at_sym(")"):
                attrs.append(ts.expect_ident("attribute name").text)
                while ts.accept_sym(","):
                    attrs.append(ts.expect_ident("attribute name").text)
            ts.expect_sym(")")
            if len(set(attrs)) != len(attrs):
                raise ts.error("duplicate output attribute")
            ts.expect_sym("|")
            body = Scope() if ts.at_sym("}") else self.to_scope(self.formula())
            ts.expect_sym("}")
            if attrs:
                output = Output(name, tuple(OutputColumn(a, None) for a in attrs))
        else:
            body = self.to_scope(self.formula())
        ts.expect_eof()
        return lift_output_links(TrcQuery(output, body))

    # -- raw formula: list of or-branches, each a list of units
    def formula(self) -> list:
        branches = [self.conj()]
        while self.ts.accept_keyword("or"):
            branches.append(self.conj())
        return branches

    def conj(self) -> list:
        units = [self.unit()]
        while self.ts.accept_keyword("and"):
            units.append(self.unit())
        return units

    def unit(self):
        ts = self.ts
        start = ts.peek()
        if ts.accept_keyword("not"):
            ts.expect_sym("(")
            inner = self.formula()
            ts.expect_sym(")")
            return ("not", inner, ts.span_from(start))
        if ts.accept_keyword("exists"):
            quants = [self.quantifier()]
            while ts.accept_sym(","):
                ts.accept_keyword("exists")
                quants.append(self.quantifier())
            inner = None
            if ts.accept_sym("["):
                if not ts.at_sym("]"):
                    inner = self.formula()
                ts.expect_sym("]")
            return ("exists", quants, inner, ts.span_from(start))
        if ts.accept_sym("("):
            inner = self.formula()
            ts.expect_sym(")")
            return ("group", inner)
        if ts.accept_keyword("true"):
            return ("true",)
        left = self.operand()
        op = ts.expect_op().value
        right = self.operand()
        if isinstance(left, Const) and isinstance(right, AttrRef):
            left, right = right, left
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}.get(op, op)
        return ("pred", Predicate(left, op, right, ts.span_from(start)))

    def quantifier(self) -> Quantifier:
        ts = self.ts
        start = ts.peek()
        var = ts.expect_ident("table variable", RESERVED).text
        ts.expect_keyword("in")
        rel = ts.expect_ident("relation name", RESERVED).text
        return Quantifier(var, rel, ts.span_from(start))

    def operand(self):
        ts = self.ts
        tok = ts.peek()
        if tok.kind in ("int", "string"):
            ts.advance()
            return Const(tok.value, tok.span)
        var = ts.expect_ident("operand", RESERVED)
        ts.expect_sym(".")
        attr = ts.expect_ident("attribute name")
        return AttrRef(var.text, attr.text, ts.span_from(var))

    # -- conversion to scopes
    def to_scope(self, formula: list) -> Scope:
        if len(formula) == 1 and len(formula[0]) == 1 and formula[0][0][0] == "exists":
            _, quants, inner, _ = formula[0][0]
            return Scope(tuple(quants), self.to_conjuncts(inner) if inner else ())
        return Scope((), self.to_conjuncts(formula))

    def to_conjuncts(self, formula: list) -> tuple:
        if len(formula) > 1:
            return (Disjunction(tuple(self.to_scope([b]) for b in formula)),)
        out: list = []
        for unit in formula[0]:
            kind = unit[0]
            if kind == "pred":
                out.append(unit[1])
            elif kind == "not":
                out.append(Negation(self.to_scope(unit[1]), unit[2]))
            elif kind == "exists":
                out.append(Exists(self.to_scope([[unit]]), unit[3]))
            elif kind == "group":
                out.extend(self.to_conjuncts(unit[1]))
        return tuple(out)


def parse_trc(text: str) -> TrcQuery:
    return _Parser(text).query()


# ---------------------------------------------------------------------------
# printing


def _operand(o) -> str:
    if isinstance(o, AttrRef):
        return f"{o.var}.{o.attr}"
    return format_literal(o.value)


def _predicate(p: Predicate) -> str:
    return f"{_operand(p.left)} {p.op} {_operand(p.right)}"


def _scope(s: Scope, extra: list[str] | None = None) -> str:
    items = list(extra or []) + [_formula(c) for c in s.conjuncts]
    inner = " and ".join(items)
    if s.quantified:
        quants = ", ".join(f"{x.var} in {x.relation}" for x in s.quantified)
        return f"exists {quants} [{inner}]" if items else f"exists {quants}"
    return inner if items else "true"


def _branch(s: Scope) -> str:
    text = _scope(s)
    if not s.quantified and len(s.conjuncts) > 1:
        return f"({text})"
    return text


def _formula(c) -> str:
    if isinstance(c, Predicate):
        return _predicate(c)
    if isinstance(c, Negation):
        return f"not ({_scope(c.scope)})"
    if isinstance(c, Exists):
        if not c.scope.quantified:
            return f"({_scope(c.scope)})"
        return _scope(c.scope)
    return "(" + " or ".join(_branch(b) for b in c.branches) + ")"


def print_trc(q: TrcQuery) -> str:
    if q.output is None:
        return _scope(q.body)
    links = [
        f"{q.output.name}.{c.name} = {c.source.var}.{c.source.attr}"
        for c in q.output.columns
        if c.source is not None
    ]
    head = f"{q.output.name}({', '.join(q.output.attributes)})"
    return f"{{ {head} | {_scope(q.body, links)} }}"
