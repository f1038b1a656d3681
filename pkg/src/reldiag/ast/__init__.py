"""Syntax trees for the four query dialects, canonical forms and fragment checks."""

from . import datalog, ra, sql, trc
from .checks import (
    FragmentReport,
    Violation,
    canonicalize_trc,
    check_guarded,
    classify,
    lift_output_links,
)
from .common import COMPLEMENT, FLIPPED, OPS, Const, compare
from .datalog import Program
from .trc import TrcQuery

__all__ = [
    "COMPLEMENT",
    "FLIPPED",
    "OPS",
    "Const",
    "FragmentReport",
    "Program",
    "TrcQuery",
    "Violation",
    "canonicalize_trc",
    "check_guarded",
    "classify",
    "compare",
    "datalog",
    "lift_output_links",
    "ra",
    "sql",
    "trc",
]


def dialect_of(q) -> str:
    """Dialect name of a query object: ``trc``, ``sql``, ``datalog`` or ``ra``."""
    if isinstance(q, trc.TrcQuery):
        return "trc"
    if isinstance(q, (sql.Select, sql.BooleanSelect, sql.Union_)):
        return "sql"
    if isinstance(q, datalog.Program):
        return "datalog"
    if isinstance(q, ra.BINARY + (ra.Relation, ra.Project, ra.Select, ra.Rename)):
        return "ra"
    raise TypeError(f"not a query: {type(q).__name__}")
