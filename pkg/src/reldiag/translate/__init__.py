"""Constructive translations between the query dialects and Relational Diagrams."""

from .datalog_trc import datalog_to_trc, trc_to_datalog
from .disjunction import MAX_DISJUNCTS, disjunction_free, eliminate_disjunction
from .ra_datalog import datalog_to_ra, ra_to_datalog
from .sql_trc import sql_to_trc, sql_to_trc_raw, trc_to_sql
from .trace import TraceStep, TranslationTrace, compose
from .trc_diagram import cell_to_trc, diagram_to_trc, trc_to_diagram, union_to_trc

__all__ = [
    "MAX_DISJUNCTS",
    "TraceStep",
    "TranslationTrace",
    "cell_to_trc",
    "compose",
    "datalog_to_ra",
    "datalog_to_trc",
    "diagram_to_trc",
    "disjunction_free",
    "eliminate_disjunction",
    "ra_to_datalog",
    "sql_to_trc",
    "sql_to_trc_raw",
    "trc_to_datalog",
    "trc_to_diagram",
    "trc_to_sql",
    "union_to_trc",
]
