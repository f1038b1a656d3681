"""Concrete syntax for the four query dialects."""

from __future__ import annotations

from ..ast import dialect_of
from .datalog import parse_datalog, print_datalog
from .ra import parse_ra, print_ra
from .sql import parse_sql, print_sql
from .trc import parse_trc, print_trc

DIALECTS = ("trc", "sql", "datalog", "ra")
EXTENSIONS = {".trc": "trc", ".sql": "sql", ".datalog": "datalog", ".dl": "datalog", ".ra": "ra"}

_PARSERS = {"trc": parse_trc, "sql": parse_sql, "datalog": parse_datalog, "ra": parse_ra}
_PRINTERS = {"trc": print_trc, "sql": print_sql, "datalog": print_datalog, "ra": print_ra}


def parse(dialect: str, text: str):
    """Parse ``text`` in ``dialect`` (one of ``trc``, ``sql``, ``datalog``, ``ra``)."""
    try:
        fn = _PARSERS[dialect]
    except KeyError:
        raise ValueError(f"unknown dialect {dialect!r}; expected one of {', '.join(DIALECTS)}") from None
    return fn(text)


def print_query(q) -> str:
    """Deterministic concrete syntax for any dialect's AST."""
    return _PRINTERS[dialect_of(q)](q)


__all__ = [
    "DIALECTS",
    "EXTENSIONS",
    "parse",
    "parse_datalog",
    "parse_ra",
    "parse_sql",
    "parse_trc",
    "print_datalog",
    "print_query",
    "print_ra",
    "print_sql",
    "print_trc",
]
