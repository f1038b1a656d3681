"""Tokenizer and recursive-descent helpers shared by the dialect parsers."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..errors import ParseError, SourceSpan

_OPERATORS = {
    "<>": "!=",
    "!=": "!=",
    "<=": "<=",
    ">=": ">=",
    "<": "<",
    ">": ">",
    "=": "=",
    "≠": "!=",
    "≤": "<=",
    "≥": ">=",
}

_SPEC = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<sstring>'(?:[^']|'')*')
    | (?P<dstring>"(?:[^"\\]|\\.)*")
    | (?P<int>-?\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<sym>:-|->|<>|!=|<=|>=|[<>=≠≤≥]|[()\[\]{},.|;*:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | op | sym | eof
    text: str
    value: object
    span: SourceSpan


def tokenize(text: str, comments: tuple[str, ...] = ("--",)) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if any(text.startswith(c, pos) for c in comments):
            end = text.find("\n", pos)
            pos = n if end < 0 else end
            continue
        m = _SPEC.match(text, pos)
        if m is None:
            span = SourceSpan.locate(text, pos, pos + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        raw = m.group(kind)
        span = SourceSpan.locate(text, pos, m.end())
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "sstring":
            tokens.append(Token("string", raw, raw[1:-1].replace("''", "'"), span))
        elif kind == "dstring":
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                raise ParseError("malformed string literal", span) from None
            tokens.append(Token("string", raw, value, span))
        elif kind == "int":
            tokens.append(Token("int", raw, int(raw), span))
        elif kind == "ident":
            tokens.append(Token("ident", raw, raw, span))
        elif raw in _OPERATORS:
            tokens.append(Token("op", raw, _OPERATORS[raw], span))
        else:
            tokens.append(Token("sym", raw, raw, span))
    tokens.append(Token("eof", "", None, SourceSpan.locate(text, n, n)))
    return tokens


class TokenStream:
    """Cursor over a token list with keyword-aware matching helpers."""

    def __init__(self, text: str, comments: tuple[str, ...] = ("--",)):
        self.text = text
        self.tokens = tokenize(text, comments)
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.span)

    def at_keyword(self, *words: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == "ident" and tok.text.lower() in words

    def at_sym(self, sym: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == "sym" and tok.text == sym

    def at_op(self, offset: int = 0) -> bool:
        return self.peek(offset).kind == "op"

    def accept_keyword(self, *words: str) -> Token | None:
        if self.at_keyword(*words):
            return self.advance()
        return None

    def accept_sym(self, sym: str) -> Token | None:
        if self.at_sym(sym):
            return self.advance()
        return None

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.error(f"expected {word.upper()}")
        return self.advance()

    def expect_sym(self, sym: str) -> Token:
        if not self.at_sym(sym):
            raise self.error(f"expected {sym!r}")
        return self.advance()

    def expect_op(self) -> Token:
        if not self.at_op():
            raise self.error("expected a comparison operator")
        return self.advance()

    def expect_ident(self, what: str = "identifier", reserved: tuple[str, ...] = ()) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text.lower() in reserved:
            raise self.error(f"expected {what}")
        return self.advance()

    def expect_eof(self) -> None:
        if self.peek().kind != "eof":
            raise self.error("unexpected trailing input")

    def span_from(self, start: Token) -> SourceSpan:
        last = self.tokens[max(self.pos - 1, 0)]
        end = max(last.span.end, start.span.start)
        return SourceSpan(start.span.start, end, start.span.line, start.span.column)
