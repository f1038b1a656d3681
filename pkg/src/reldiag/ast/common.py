"""Pieces shared by every dialect's syntax tree: constants and comparison operators."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..catalog import Value, sort_of
from ..errors import SourceSpan

OPS = ("=", "!=", "<", "<=", ">", ">=")
SYMMETRIC_OPS = frozenset({"=", "!="})

# Operator seen when the operands are swapped: a < b  <=>  b > a.
FLIPPED = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}
# Logical complement: not (a < b)  <=>  a >= b.
COMPLEMENT = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def compare(left: Value, op: str, right: Value) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ValueError(f"unknown operator {op}")


def span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    value: Value
    span: SourceSpan | None = span_field()

    @property
    def sort(self) -> str:
        return sort_of(self.value)


def format_literal(value: Value) -> str:
    """Single-quoted string (quote doubled) or decimal integer."""
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return str(value)
