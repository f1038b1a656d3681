"""Query corpus shared by the test modules.

Every TRC entry is canonical, guarded and non-disjunctive. Queries taken
from the worked examples keep their original form; the rest exercise
selections, inequalities, self-joins, empty root partitions, and deeper
negation nesting.
"""

from __future__ import annotations

from dataclasses import dataclass

from reldiag.catalog import Schema

DIVISION = Schema.parse("R(A,B); S(B)")
UNARY = Schema.parse("R(A); S(A)")
SAILORS = Schema.parse("Sailor(sid, sname:str); Boat(bid, color:str); Reserves(sid, bid)")
SAILORS_BOATS = Schema.parse("Sailor(sid, sname:str); Boat(bid); Reserves(sid, bid)")
SUPPLIERS = Schema.parse("SX(sno, sname:str); PX(pno); SPX(sno, pno)")
THREE = Schema.parse("R(A,B,C); S(B,C)")
GRAPH = Schema.parse("E(src, dst)")
SINGLE = Schema.parse("R(A,B)")


@dataclass(frozen=True)
class Fixture:
    name: str
    schema: Schema
    text: str
    worked: bool = False  # taken from a worked example


TRC_FIXTURES = [
    Fixture(
        "sailors_all_boats",
        SAILORS,
        "{q(sname) | exists s in Sailor [q.sname = s.sname and not (exists b in Boat "
        "[not (exists r in Reserves [r.sid = s.sid and r.bid = b.bid])])]}",
        True,
    ),
    Fixture(
        "all_sailors_red_boat",
        SAILORS,
        "not (exists s in Sailor [not (exists b in Boat, r in Reserves "
        "[b.color = 'red' and r.bid = b.bid and r.sid = s.sid])])",
        True,
    ),
    Fixture(
        "division1",
        DIVISION,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S "
        "[not (exists r2 in R [r2.B = s.B and r2.A = r.A])])]}",
        True,
    ),
    Fixture(
        "division2",
        DIVISION,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S, r3 in R [r3.A = r.A "
        "and not (exists r2 in R [r2.B = s.B and r2.A = r3.A])])]}",
        True,
    ),
    Fixture("limits_q1", UNARY, "{q(A) | exists r in R, s in S [q.A = r.A and r.A = s.A]}", True),
    Fixture("limits_q2", UNARY, "{q(A) | exists r in R [q.A = r.A and not (exists s in S [s.A = r.A])]}", True),
    Fixture("limits_q3", UNARY, "{q(A) | exists r in R [q.A = r.A and not (exists s in S [s.A < r.A])]}", True),
    Fixture(
        "limits_q3_guarded",
        UNARY,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S, r2 in R [s.A < r2.A and r2.A = r.A])]}",
        True,
    ),
    Fixture(
        "disjunction_rewritten",
        THREE,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S [not (exists r2 in R "
        "[r2.B = s.B and r2.A = r.A]) and not (exists r3 in R [r3.C = s.C and r3.A = r.A])])]}",
        True,
    ),
    Fixture(
        "red_or_blue",
        SAILORS,
        "{q(sname) | exists s in Sailor, r in Reserves [q.sname = s.sname and s.sid = r.sid "
        "and not (not (exists b1 in Boat [b1.bid = r.bid and b1.color = 'red']) "
        "and not (exists b2 in Boat [b2.bid = r.bid and b2.color = 'blue']))]}",
        True,
    ),
    Fixture("union_cell_r", UNARY, "{q(A) | exists r in R [q.A = r.A]}", True),
    Fixture("union_cell_s", UNARY, "{q(A) | exists s in S [q.A = s.A]}", True),
    Fixture("variety_join", DIVISION, "{q(A) | exists r in R, s in S [q.A = r.A and r.B = s.B]}", True),
    Fixture("variety_antijoin", DIVISION, "{q(A) | exists r in R [q.A = r.A and not (exists s in S [r.B = s.B])]}", True),
    Fixture("variety_max", DIVISION, "{q(A) | exists r in R [q.A = r.A and not (exists s in S [r.B < s.B])]}", True),
    Fixture("iso_q2", SINGLE, "{q(A) | exists r1 in R, r2 in R [q.A = r1.A and r1.B = r2.B]}", True),
    Fixture("iso_q3", SINGLE, "{q(A) | exists r1 in R, r2 in R [q.A = r1.A and r1.A = r2.A]}", True),
    Fixture(
        "boolean_or",
        UNARY,
        "not (not (exists r in R [r.A = 1]) and not (exists r2 in R [r2.A = 2]))",
        True,
    ),
    Fixture(
        "red_boat_sailors",
        SAILORS,
        "{q(sname) | exists s in Sailor, r in Reserves, b in Boat "
        "[q.sname = s.sname and s.sid = r.sid and r.bid = b.bid and b.color = 'red']}",
    ),
    Fixture(
        "all_red_boats",
        SAILORS,
        "{q(sname) | exists s in Sailor [q.sname = s.sname and not (exists b in Boat "
        "[b.color = 'red' and not (exists r in Reserves [r.sid = s.sid and r.bid = b.bid])])]}",
    ),
    Fixture("self_inequality", SINGLE, "{q(A, B) | exists r in R [q.A = r.A and q.B = r.B and r.A < r.B]}"),
    Fixture("selection_constant", SINGLE, "{q(B) | exists r in R [q.B = r.B and r.A = 1 and r.B != 0]}"),
    Fixture("boolean_exists", SINGLE, "exists r in R"),
    Fixture(
        "path3",
        GRAPH,
        "{q(src) | exists e1 in E, e2 in E, e3 in E [q.src = e1.src and e1.dst = e2.src and e2.dst = e3.src]}",
    ),
    Fixture(
        "two_outputs",
        DIVISION,
        "{q(A, B) | exists r in R, s in S [q.A = r.A and q.B = s.B and r.B <= s.B]}",
    ),
    Fixture(
        "sibling_negations",
        THREE,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S [s.B = r.B]) "
        "and not (exists s2 in S [s2.C = r.C])]}",
    ),
    Fixture(
        "triple_nesting",
        DIVISION,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S [s.B > r.A and not "
        "(exists r2 in R [r2.B = s.B and not (exists s2 in S [s2.B = r2.A])])])]}",
    ),
    Fixture("inner_selection", DIVISION, "{q(A) | exists r in R [q.A = r.A and not (exists s in S [s.B = 1])]}"),
    Fixture(
        "empty_root_double_negation",
        DIVISION,
        "not (not (exists r in R, s in S [r.B = s.B]))",
    ),
    Fixture(
        "cross_scope_inequality",
        DIVISION,
        "{q(A) | exists r in R [q.A = r.A and not (exists s in S, r2 in R [r2.A = r.A and s.B >= r2.B])]}",
    ),
]

FIXTURES = {f.name: f for f in TRC_FIXTURES}

# Relational division in every dialect (Set 1 keeps three references to R).
DIVISION_QUERIES = {
    "trc1": ("trc", FIXTURES["division1"].text),
    "trc2": ("trc", FIXTURES["division2"].text),
    "ra": ("ra", "minus(project[A](R), project[A](minus(times(project[A](R), S), R)))"),
    "datalog": ("datalog", "I(x) :- R(x,_), S(y), not R(x,y). Q(x) :- R(x,_), not I(x)."),
    "sql_a": (
        "sql",
        "SELECT DISTINCT R.A FROM R WHERE not exists (SELECT * FROM S WHERE not exists "
        "(SELECT * FROM R AS R2 WHERE R2.B = S.B AND R2.A = R.A))",
    ),
    "sql_c": (
        "sql",
        "SELECT DISTINCT R.A FROM R WHERE not exists (SELECT * FROM S, R AS R3 WHERE R3.A = R.A "
        "AND not exists (SELECT * FROM R AS R2 WHERE R2.B = S.B AND R2.A = R3.A))",
    ),
    "sql_e": (
        "sql",
        "SELECT DISTINCT R.A FROM R WHERE R.A not in (SELECT R3.A FROM S, R AS R3 "
        "WHERE (R3.A, S.B) not in (SELECT R2.A, R2.B FROM R AS R2))",
    ),
}
DIVISION_SET1 = ("trc2", "ra", "datalog", "sql_c", "sql_e")
DIVISION_SET2 = ("trc1", "sql_a")

# Syntactic SQL variants over R(A,B), S(B); each group shares one canonical TRC.
SQL_VARIETY = {
    "join": [
        "SELECT DISTINCT R.A FROM R, S WHERE R.B = S.B",
        "SELECT DISTINCT R.A FROM R WHERE exists (SELECT * FROM S WHERE R.B = S.B)",
        "SELECT DISTINCT R.A FROM R WHERE R.B in (SELECT S.B FROM S)",
        "SELECT DISTINCT R.A FROM R WHERE R.B = any (SELECT S.B FROM S)",
    ],
    "antijoin": [
        "SELECT DISTINCT R.A FROM R WHERE not exists (SELECT * FROM S WHERE R.B = S.B)",
        "SELECT DISTINCT R.A FROM R WHERE R.B not in (SELECT S.B FROM S)",
        "SELECT DISTINCT R.A FROM R WHERE R.B <> all (SELECT S.B FROM S)",
    ],
    "max": [
        "SELECT DISTINCT R.A FROM R WHERE not exists (SELECT * FROM S WHERE R.B < S.B)",
        "SELECT DISTINCT R.A FROM R WHERE not (R.B < any (SELECT S.B FROM S))",
        "SELECT DISTINCT R.A FROM R WHERE R.B >= all (SELECT S.B FROM S)",
    ],
}
SQL_VARIETY_TRC = {"join": "variety_join", "antijoin": "variety_antijoin", "max": "variety_max"}

# Same pattern over two schemas: reserved-all-boats vs supplied-all-parts.
SIMILAR_PAIR = (
    FIXTURES["sailors_all_boats"].text,
    "{q(sname) | exists sx in SX [q.sname = sx.sname and not (exists px in PX "
    "[not (exists spx in SPX [spx.sno = sx.sno and spx.pno = px.pno])])]}",
)

ISO_Q1 = "Q1(x) :- R(x,_), R(x,_)."
ISO_Q2 = "Q2(x) :- R(x,y), R(_,y)."

DISJUNCTION_SQL = (
    "SELECT DISTINCT R.A FROM R WHERE not exists (SELECT * FROM S WHERE not exists "
    "(SELECT * FROM R AS R2 WHERE (R2.B = S.B OR R2.C = S.C) AND R2.A = R.A))"
)
UNION_TRC = "{q(A) | exists r in R [q.A = r.A] or exists s in S [q.A = s.A]}"
UNION_SQL = "(SELECT DISTINCT R.A FROM R) UNION (SELECT DISTINCT S.A FROM S)"
BOOLEAN_OR_TRC = "exists r in R [r.A = 1 or r.A = 2]"
RED_OR_BLUE_TRC = (
    "{q(sname) | exists s in Sailor, r in Reserves [q.sname = s.sname and s.sid = r.sid and "
    "exists b in Boat [b.bid = r.bid and (b.color = 'red' or b.color = 'blue')]]}"
)
