"""Prefix-form relational algebra syntax.

    expr ::= Rel ['as' Name]
           | 'project' '[' [col {',' col}] ']' '(' expr ')'
           | 'select' '[' cond {'and' cond} ']' '(' expr ')'
           | ('times' | 'minus' | 'union') '(' expr ',' expr ')'
           | ('join' | 'antijoin') ['[' cond {'and' cond} ']'] '(' expr ',' expr ')'
           | 'rename' '[' (col '->' Name {',' col '->' Name} | Name) ']' '(' expr ')'
    cond ::= col op (col | literal)
    col  ::= [Name '.'] Attr

``join``/``antijoin`` without a condition list are natural (on shared attribute
names). ``rename[F](e)`` requalifies every column of ``e`` as ``F``.
"""

from __future__ import annotations

from ..ast.common import FLIPPED, Const, format_literal
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
)
from .lexer import TokenStream

KEYWORDS = ("project", "select", "times", "join", "minus", "union", "antijoin", "rename", "and", "or", "as")
_BINARY = {"times": Product, "minus": Minus, "union": Union_}


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, comments=("--", "#"))

    def statement(self):
        e = self.expr()
        self.ts.expect_eof()
        return e

    def expr(self):
        ts = self.ts
        start = ts.peek()
        word = start.text.lower() if start.kind == "ident" else ""
        if word in ("project", "select", "rename") and ts.at_sym("[", 1):
            ts.advance()
            ts.expect_sym("[")
            if word == "project":
                cols = []
                if not ts.at_sym("]"):
                    cols.append(self.col())
                    while ts.accept_sym(","):
                        cols.append(self.col())
                ts.expect_sym("]")
                child = self.unary_arg()
                return Project(tuple(cols), child, ts.span_from(start))
            if word == "select":
                conds = self.conditions(allow_or=True)
                ts.expect_sym("]")
                child = self.unary_arg()
                return Select(conds, child, ts.span_from(start))
            return self.rename(start)
        if word in _BINARY and ts.at_sym("(", 1):
            ts.advance()
            left, right = self.binary_args()
            return _BINARY[word](left, right, ts.span_from(start))
        if word in ("join", "antijoin") and (ts.at_sym("(", 1) or ts.at_sym("[", 1)):
            ts.advance()
            conds: tuple = ()
            if ts.accept_sym("["):
                conds = self.conditions(allow_or=False)
                ts.expect_sym("]")
            left, right = self.binary_args()
            cls = Join if word == "join" else Antijoin
            return cls(conds, left, right, ts.span_from(start))
        name = ts.expect_ident("relation or operator", KEYWORDS)
        alias = None
        if ts.accept_keyword("as"):
            alias = ts.expect_ident("alias", KEYWORDS).text
        return Relation(name.text, alias, ts.span_from(start))

    def rename(self, start):
        ts = self.ts
        if ts.peek().kind == "ident" and ts.at_sym("]", 1):
            target = ts.advance().text
            ts.expect_sym("]")
            child = self.unary_arg()
            return Rename((), target, child, ts.span_from(start))
        pairs = [self.rename_pair()]
        while ts.accept_sym(","):
            pairs.append(self.rename_pair())
        ts.expect_sym("]")
        child = self.unary_arg()
        return Rename(tuple(pairs), None, child, ts.span_from(start))

    def rename_pair(self):
        old = self.col()
        self.ts.expect_sym("->")
        new = self.ts.expect_ident("new attribute name", KEYWORDS).text
        return (old, new)

    def unary_arg(self):
        self.ts.expect_sym("(")
        e = self.expr()
        self.ts.expect_sym(")")
        return e

    def binary_args(self):
        ts = self.ts
        ts.expect_sym("(")
        left = self.expr()
        ts.expect_sym(",")
        right = self.expr()
        ts.expect_sym(")")
        return left, right

    def conditions(self, allow_or: bool) -> tuple:
        ts = self.ts
        start = ts.peek()
        branches = [self.conjunction()]
        while ts.at_keyword("or"):
            if not allow_or:
                raise ts.error("disjunction is only allowed in select")
            ts.advance()
            branches.append(self.conjunction())
        if len(branches) == 1:
            return branches[0]
        return (OrCondition(tuple(branches), ts.span_from(start)),)

    def conjunction(self) -> tuple:
        conds = [self.condition()]
        while self.ts.accept_keyword("and"):
            conds.append(self.condition())
        return tuple(conds)

    def condition(self) -> Condition:
        ts = self.ts
        start = ts.peek()
        if start.kind in ("int", "string"):
            ts.advance()
            op = ts.expect_op().value
            col = self.col()
            return Condition(col, FLIPPED[op], Const(start.value, start.span), ts.span_from(start))
        left = self.col()
        op = ts.expect_op().value
        tok = ts.peek()
        if tok.kind in ("int", "string"):
            ts.advance()
            right = Const(tok.value, tok.span)
        else:
            right = self.col()
        return Condition(left, op, right, ts.span_from(start))

    def col(self) -> ColRef:
        ts = self.ts
        first = ts.expect_ident("attribute", KEYWORDS)
        if ts.accept_sym("."):
            attr = ts.expect_ident("attribute name", KEYWORDS)
            return ColRef(first.text, attr.text, ts.span_from(first))
        return ColRef(None, first.text, first.span)


def parse_ra(text: str):
    return _Parser(text).statement()


def _col(c: ColRef) -> str:
    return str(c)


def _cond(c) -> str:
    if isinstance(c, OrCondition):
        return " or ".join(" and ".join(_cond(x) for x in b) for b in c.branches)
    right = format_literal(c.right.value) if isinstance(c.right, Const) else _col(c.right)
    return f"{_col(c.left)} {c.op} {right}"


def print_ra(e) -> str:
    if isinstance(e, Relation):
        return f"{e.name} as {e.alias}" if e.alias else e.name
    if isinstance(e, Project):
        return f"project[{', '.join(_col(c) for c in e.columns)}]({print_ra(e.child)})"
    if isinstance(e, Select):
        return f"select[{' and '.join(_cond(c) for c in e.conditions)}]({print_ra(e.child)})"
    if isinstance(e, Rename):
        inner = e.relation if e.relation else ", ".join(f"{_col(o)}->{n}" for o, n in e.attributes)
        return f"rename[{inner}]({print_ra(e.child)})"
    if isinstance(e, (Join, Antijoin)):
        word = "join" if isinstance(e, Join) else "antijoin"
        conds = f"[{' and '.join(_cond(c) for c in e.conditions)}]" if e.conditions else ""
        return f"{word}{conds}({print_ra(e.left)}, {print_ra(e.right)})"
    word = {Product: "times", Minus: "minus", Union_: "union"}[type(e)]
    return f"{word}({print_ra(e.left)}, {print_ra(e.right)})"
