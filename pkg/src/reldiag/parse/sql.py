"""Parser and printer for the nested SELECT fragment of SQL.

    Q ::= S {UNION S}
    S ::= SELECT [DISTINCT] (C {, C} | *) FROM R {, R} [WHERE P]
        | SELECT NOT '(' P ')' | SELECT [NOT] EXISTS '(' Q ')'
    C ::= [T.]A
    R ::= T [[AS] T]
    P ::= P {AND P} | P OR P | C O C | C O V | NOT '(' P ')' | [NOT] EXISTS '(' Q ')'
        | C [NOT] IN '(' Q ')' | '(' C {, C} ')' [NOT] IN '(' Q ')'
        | C O (ALL | ANY | SOME) '(' Q ')' | '(' P ')'
    O ::= = | <> | != | < | <= | >= | >

Keywords are case-insensitive; ``--`` starts a comment. OR and UNION belong
to the extended grammar accepted for disjunction elimination.
"""

from __future__ import annotations

from ..ast.common import FLIPPED, Const, format_literal
from ..ast.sql import (
    BooleanSelect,
    ColumnRef,
    Comparison,
    Condition,
    ExistsCond,
    InCond,
    NotGroup,
    OrCond,
    QuantifiedCond,
    Select,
    TableRef,
    Union_,
)
from ..errors import ParseError
from .lexer import TokenStream

KEYWORDS = (
    "select", "distinct", "from", "where", "and", "or", "not", "exists", "in",
    "all", "any", "some", "as", "union",
)


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, comments=("--",))

    def query(self):
        start = self.ts.peek()
        parts = [self.member()]
        while self.ts.accept_keyword("union"):
            parts.append(self.member())
        if len(parts) == 1:
            return parts[0]
        return Union_(tuple(parts), self.ts.span_from(start))

    def member(self):
        if self.ts.accept_sym("("):
            q = self.select()
            self.ts.expect_sym(")")
            return q
        return self.select()

    def statement(self):
        q = self.query()
        self.ts.accept_sym(";")
        self.ts.expect_eof()
        return q

    def subquery(self) -> Select:
        ts = self.ts
        ts.expect_sym("(")
        tok = ts.peek()
        q = self.select()
        if not isinstance(q, Select):
            raise ts.error("subquery must be a SELECT ... FROM block", tok)
        ts.expect_sym(")")
        return q

    def select(self):
        ts = self.ts
        start = ts.expect_keyword("select")
        if ts.at_keyword("not") and ts.at_sym("(", 1):
            ts.advance()
            ts.expect_sym("(")
            conds = self.predicate()
            ts.expect_sym(")")
            return BooleanSelect("not", None, conds, ts.span_from(start))
        if ts.at_keyword("exists") or (ts.at_keyword("not") and ts.at_keyword("exists", offset=1)):
            negated = ts.accept_keyword("not") is not None
            ts.expect_keyword("exists")
            sub = self.subquery()
            return BooleanSelect("not exists" if negated else "exists", sub, (), ts.span_from(start))
        distinct = ts.accept_keyword("distinct") is not None
        if ts.accept_sym("*"):
            columns = None
        else:
            columns = [self.column()]
            while ts.accept_sym(","):
                columns.append(self.column())
            columns = tuple(columns)
        ts.expect_keyword("from")
        froms = [self.table()]
        while ts.accept_sym(","):
            froms.append(self.table())
        seen: set[str] = set()
        for t in froms:
            if t.name in seen:
                if t.alias is None:
                    raise ParseError(f"relation {t.relation} repeats in FROM; an alias is required", t.span)
                raise ParseError(f"duplicate alias {t.name}", t.span)
            seen.add(t.name)
        where: tuple = ()
        if ts.accept_keyword("where"):
            where = self.predicate()
        return Select(columns, tuple(froms), where, distinct, ts.span_from(start))

    def table(self) -> TableRef:
        ts = self.ts
        start = ts.peek()
        rel = ts.expect_ident("relation name", KEYWORDS).text
        alias = None
        if ts.accept_keyword("as"):
            alias = ts.expect_ident("alias", KEYWORDS).text
        elif ts.peek().kind == "ident" and not ts.at_keyword(*KEYWORDS):
            alias = ts.advance().text
        return TableRef(rel, alias, ts.span_from(start))

    def column(self) -> ColumnRef:
        ts = self.ts
        first = ts.expect_ident("column", KEYWORDS)
        if ts.accept_sym("."):
            attr = ts.expect_ident("attribute name", KEYWORDS)
            return ColumnRef(first.text, attr.text, ts.span_from(first))
        return ColumnRef(None, first.text, first.span)

    # -- predicates: returns a conjunction (tuple of conditions)
    def predicate(self) -> tuple[Condition, ...]:
        ts = self.ts
        start = ts.peek()
        branches = [self.conjunction()]
        while ts.accept_keyword("or"):
            branches.append(self.conjunction())
        if len(branches) == 1:
            return branches[0]
        return (OrCond(tuple(branches), ts.span_from(start)),)

    def conjunction(self) -> tuple[Condition, ...]:
        conds = list(self.atom())
        while self.ts.accept_keyword("and"):
            conds.extend(self.atom())
        return tuple(conds)

    def atom(self) -> tuple[Condition, ...]:
        ts = self.ts
        start = ts.peek()
        if ts.at_keyword("not") and ts.at_keyword("exists", offset=1):
            ts.advance()
            ts.advance()
            return (ExistsCond(self.subquery(), True, ts.span_from(start)),)
        if ts.accept_keyword("exists"):
            return (ExistsCond(self.subquery(), False, ts.span_from(start)),)
        if ts.accept_keyword("not"):
            ts.expect_sym("(")
            inner = self.predicate()
            ts.expect_sym(")")
            return (NotGroup(inner, ts.span_from(start)),)
        if ts.at_sym("("):
            tuple_cols = self._try_column_tuple()
            if tuple_cols is not None:
                negated = ts.accept_keyword("not") is not None
                ts.expect_keyword("in")
                sub = self.subquery()
                return (InCond(tuple_cols, sub, negated, ts.span_from(start)),)
            ts.advance()
            inner = self.predicate()
            ts.expect_sym(")")
            return inner
        if ts.peek().kind in ("int", "string"):
            value = ts.advance()
            op = ts.expect_op().value
            col = self.column()
            return (Comparison(col, FLIPPED[op], Const(value.value, value.span), ts.span_from(start)),)
        col = self.column()
        if ts.at_keyword("not", "in"):
            negated = ts.accept_keyword("not") is not None
            ts.expect_keyword("in")
            sub = self.subquery()
            return (InCond((col,), sub, negated, ts.span_from(start)),)
        op = ts.expect_op().value
        if ts.at_keyword("all", "any", "some"):
            quant = ts.advance().text.lower()
            quant = "any" if quant == "some" else quant
            sub = self.subquery()
            return (QuantifiedCond(col, op, quant, sub, ts.span_from(start)),)
        tok = ts.peek()
        if tok.kind in ("int", "string"):
            ts.advance()
            right = Const(tok.value, tok.span)
        else:
            right = self.column()
        return (Comparison(col, op, right, ts.span_from(start)),)

    def _try_column_tuple(self) -> tuple[ColumnRef, ...] | None:
        """Parse ``(C, C, ...)`` followed by [NOT] IN, or rewind and return None."""
        ts = self.ts
        save = ts.pos
        ts.advance()
        cols = []
        try:
            cols.append(self.column())
            while ts.accept_sym(","):
                cols.append(self.column())
            ts.expect_sym(")")
        except ParseError:
            ts.pos = save
            return None
        if ts.at_keyword("in") or (ts.at_keyword("not") and ts.at_keyword("in", offset=1)):
            return tuple(cols)
        ts.pos = save
        return None


def parse_sql(text: str):
    return _Parser(text).statement()


# ---------------------------------------------------------------------------
# printing

_OP_TEXT = {"!=": "<>"}


def _col(c: ColumnRef) -> str:
    return f"{c.table}.{c.attr}" if c.table else c.attr


def _table(t: TableRef) -> str:
    return f"{t.relation} AS {t.alias}" if t.alias else t.relation


def _cond(c: Condition) -> str:
    if isinstance(c, Comparison):
        right = format_literal(c.right.value) if isinstance(c.right, Const) else _col(c.right)
        return f"{_col(c.left)} {_OP_TEXT.get(c.op, c.op)} {right}"
    if isinstance(c, NotGroup):
        return f"NOT ({_conj(c.conditions)})"
    if isinstance(c, ExistsCond):
        return f"{'NOT EXISTS' if c.negated else 'EXISTS'} ({print_sql(c.query)})"
    if isinstance(c, InCond):
        cols = _col(c.columns[0]) if len(c.columns) == 1 else "(" + ", ".join(map(_col, c.columns)) + ")"
        return f"{cols} {'NOT IN' if c.negated else 'IN'} ({print_sql(c.query)})"
    if isinstance(c, QuantifiedCond):
        return f"{_col(c.column)} {_OP_TEXT.get(c.op, c.op)} {c.quantifier.upper()} ({print_sql(c.query)})"
    return "(" + " OR ".join(_conj(b) for b in c.branches) + ")"


def _conj(conds) -> str:
    parts = []
    for c in conds:
        text = _cond(c)
        parts.append(text)
    return " AND ".join(parts)


def print_sql(q) -> str:
    if isinstance(q, Union_):
        return " UNION ".join(print_sql(p) for p in q.queries)
    if isinstance(q, BooleanSelect):
        if q.kind == "not":
            return f"SELECT NOT ({_conj(q.conditions)})"
        return f"SELECT {q.kind.upper()} ({print_sql(q.query)})"
    cols = "*" if q.columns is None else ", ".join(_col(c) for c in q.columns)
    head = f"SELECT {'DISTINCT ' if q.distinct else ''}{cols} FROM {', '.join(_table(t) for t in q.from_)}"
    if q.where:
        head += f" WHERE {_conj(q.where)}"
    return head
