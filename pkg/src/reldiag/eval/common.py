"""Result relations and helpers shared by the dialect evaluators."""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ..catalog import Schema, Value, format_value, sort_of
from ..errors import SortError

OPERATOR_FN: dict[str, Callable[[Any, Any], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

# Relation name -> collection of tuples; a Database's ``tuples`` mapping qualifies.
Instance = Mapping[str, Any]


@dataclass(frozen=True)
class ResultRelation:
    """Set-semantics answer: attribute names plus tuples (positional)."""

    attributes: tuple[str, ...]
    tuples: frozenset

    @property
    def is_boolean(self) -> bool:
        return not self.attributes

    @property
    def truth(self) -> bool:
        return bool(self.tuples)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.tuples, key=lambda r: tuple((isinstance(v, str), v) for v in r))

    def to_dict(self) -> dict[str, Any]:
        return {"attributes": list(self.attributes), "rows": [list(r) for r in self.sorted_rows()]}

    def to_text(self) -> str:
        if self.is_boolean:
            return "true" if self.truth else "false"
        lines = [", ".join(self.attributes)]
        lines += [", ".join(format_value(v) for v in r) for r in self.sorted_rows()]
        return "\n".join(lines)


def check_sorts(left: str | None, right: str | None, where: str) -> None:
    if left is not None and right is not None and left != right:
        raise SortError(f"cross-sort comparison in {where}: {left} vs {right}")


def const_sort(value: Value) -> str:
    return sort_of(value)


def relation_sorts(schema: Schema, name: str) -> tuple[str, ...]:
    return schema.relation(name).sorts
