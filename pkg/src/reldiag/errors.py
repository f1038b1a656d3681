"""Exception hierarchy and source locations shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """Half-open character range ``[start, end)`` with 1-based line/column of ``start``."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"span start {self.start} exceeds end {self.end}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"

    @staticmethod
    def locate(text: str, start: int, end: int) -> SourceSpan:
        line = text.count("\n", 0, start) + 1
        column = start - (text.rfind("\n", 0, start) + 1) + 1
        return SourceSpan(start, end, line, column)


class ReldiagError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ReldiagError):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.span = span
        where = f" at {span}" if span is not None else ""
        super().__init__(f"{message}{where}")
        self.bare_message = message


class SchemaError(ReldiagError):
    """Unknown relation or attribute, arity mismatch, or malformed database."""


class SortError(SchemaError):
    """Comparison or tuple value mixing the integer and string sorts."""


class FragmentError(ReldiagError):
    """Query lies outside the fragment required by an operation."""


class DiagramError(ReldiagError):
    """Diagram is undecodable or violates the validity conditions."""


class TranslationError(ReldiagError):
    """A translation cannot be carried out for the given input."""
