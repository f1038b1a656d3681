"""Step logs and table-reference correspondences recorded by every translation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class TraceStep:
    number: int
    description: str
    elements: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {"step": self.number, "description": self.description, "elements": list(self.elements)}


@dataclass(frozen=True)
class TranslationTrace:
    """What a translation did, and how source table references map to target ones.

    ``correspondence[i]`` is the position in the target signature of the
    i-th source table reference. It is ``None`` when the translation is not
    pattern-preserving (for example after inserting a guard table).
    """

    source: str
    target: str
    steps: tuple[TraceStep, ...] = ()
    correspondence: tuple[int, ...] | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        c = self.correspondence
        if c is not None and sorted(c) != list(range(len(c))):
            raise ValueError(f"correspondence {c} is not a bijection")

    @property
    def pattern_preserving(self) -> bool:
        return self.correspondence is not None

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "target": self.target,
            "pattern_preserving": self.pattern_preserving,
            "correspondence": list(self.correspondence) if self.correspondence is not None else None,
            "steps": [s.to_dict() for s in self.steps],
            "notes": list(self.notes),
        }


class TraceLog:
    """Mutable builder for a trace's step list."""

    def __init__(self) -> None:
        self.steps: list[TraceStep] = []
        self.notes: list[str] = []

    def step(self, description: str, *elements: str) -> None:
        self.steps.append(TraceStep(len(self.steps) + 1, description, tuple(elements)))

    def note(self, text: str) -> None:
        self.notes.append(text)

    def trace(self, source: str, target: str, correspondence) -> TranslationTrace:
        corr = tuple(correspondence) if correspondence is not None else None
        return TranslationTrace(source, target, tuple(self.steps), corr, tuple(self.notes))


def compose(first: TranslationTrace, second: TranslationTrace) -> TranslationTrace:
    """Trace of running ``first`` then ``second``."""
    corr = None
    if first.correspondence is not None and second.correspondence is not None:
        corr = tuple(second.correspondence[j] for j in first.correspondence)
    steps = [*first.steps]
    for s in second.steps:
        steps.append(TraceStep(len(steps) + 1, s.description, s.elements))
    return TranslationTrace(first.source, second.target, tuple(steps), corr, first.notes + second.notes)
