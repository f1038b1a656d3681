"""Set-semantics evaluation of every dialect and the bounded equivalence oracle."""

from __future__ import annotations

from typing import Callable

from ..ast import dialect_of
from ..catalog import Database, Schema
from .common import Instance, ResultRelation
from .datalog import compile_datalog
from .ra import compile_ra, ra_columns
from .sql import compile_sql
from .trc import compile_trc, evaluate_trc_by_candidates

_COMPILERS = {"trc": compile_trc, "sql": compile_sql, "datalog": compile_datalog, "ra": compile_ra}


def compile_query(q, schema: Schema) -> Callable[[Instance], ResultRelation]:
    """Type-check ``q`` once and return a function from instances to answers.

    Diagrams are evaluated through their TRC reading; multi-cell diagrams
    return the union of their cells.
    """
    from ..diagram import Diagram

    if isinstance(q, Diagram):
        from ..translate import union_to_trc

        parts = [compile_trc(t, schema) for t in union_to_trc(q)]

        def run(db: Instance) -> ResultRelation:
            results = [p(db) for p in parts]
            return ResultRelation(results[0].attributes, frozenset().union(*(r.tuples for r in results)))

        return run
    return _COMPILERS[dialect_of(q)](q, schema)


def evaluate(q, db: Database) -> ResultRelation:
    """Answer of ``q`` (any dialect or a diagram) on ``db``."""
    return compile_query(q, db.schema)(db.tuples)


from .oracle import Bound, EquivalenceVerdict, equivalent_bounded

__all__ = [
    "Bound",
    "EquivalenceVerdict",
    "ResultRelation",
    "compile_query",
    "equivalent_bounded",
    "evaluate",
    "evaluate_trc_by_candidates",
    "ra_columns",
]
