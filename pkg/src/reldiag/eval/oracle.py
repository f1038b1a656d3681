"""Bounded logical-equivalence checking.

Two queries are compared on every database whose values come from a small
per-sort domain (the query constants plus canonical fill values), enumerated
smallest first, and then on seeded random databases over a slightly larger
domain. A difference is a definitive counterexample; agreement is evidence up
to the bound only.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

from ..catalog import Database, Schema, save_database, sort_of
from ..errors import SchemaError
from .common import Instance, ResultRelation

Evaluator = Callable[[Instance], ResultRelation]


@dataclass(frozen=True)
class Bound:
    """Search limits: exhaustive domain size, random trials and their domain size, seed."""

    domain_size: int = 2
    trials: int = 100
    random_size: int = 3
    seed: int = 1
    max_databases: int = 1 << 18

    def __post_init__(self) -> None:
        if self.domain_size < 1 or self.random_size < 1 or self.trials < 0 or self.max_databases < 1:
            raise ValueError("bounds must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "domain_size": self.domain_size,
            "trials": self.trials,
            "random_size": self.random_size,
            "seed": self.seed,
            "max_databases": self.max_databases,
        }


DEFAULT_BOUND = Bound()


def _fill(sort: str, consts: list) -> Iterator:
    if sort == "str":
        for n in itertools.count():
            s, k = "", n
            while True:
                s = chr(ord("a") + k % 26) + s
                k = k // 26 - 1
                if k < 0:
                    break
            yield s
        return
    for c in consts:
        yield c + 1
    for c in consts:
        yield c - 1
    yield from itertools.count()


def domain(sort: str, constants: Iterable, size: int) -> list:
    """Sorted domain containing every constant of ``sort`` plus fill values up to ``size``."""
    consts = sorted({c for c in constants if sort_of(c) == sort})
    values = list(consts)
    for v in _fill(sort, consts):
        if len(values) >= size:
            break
        if v not in values:
            values.append(v)
    return sorted(values)


def _candidate_tuples(schema: Schema, domains: dict[str, list]) -> dict[str, list[tuple]]:
    return {
        rel.name: list(itertools.product(*(domains[s] for s in rel.sorts)))
        for rel in sorted(schema, key=lambda r: r.name)
    }


class DatabaseSpace:
    """Canonical enumeration of the bounded databases for a set of relations.

    The exhaustive tier lists every instance over the exhaustive domain in
    order of total size (then per relation, lexicographically); it stops at
    ``bound.max_databases``. The random tier draws ``bound.trials`` instances
    over the random domain, including each candidate tuple with probability
    one half.
    """

    def __init__(self, schema: Schema, constants: Iterable, bound: Bound = DEFAULT_BOUND):
        self.schema = schema
        self.bound = bound
        consts = set(constants)
        sorts = sorted({s for rel in schema for s in rel.sorts})
        self.constant_counts = {s: len({c for c in consts if sort_of(c) == s}) for s in sorts}
        self.below_constants = any(n > bound.domain_size for n in self.constant_counts.values())
        self.domains = {s: domain(s, consts, bound.domain_size) for s in sorts}
        self.random_domains = {s: domain(s, consts, max(bound.random_size, len(self.domains[s]))) for s in sorts}
        self.candidates = _candidate_tuples(schema, self.domains)
        self.random_candidates = _candidate_tuples(schema, self.random_domains)
        self.names = list(self.candidates)
        self.exhaustive_total = 2 ** sum(len(v) for v in self.candidates.values())
        self.exhaustive_complete = self.exhaustive_total <= bound.max_databases

    def exhaustive(self) -> Iterator[dict[str, frozenset]]:
        per_rel = []
        for name in self.names:
            cands = self.candidates[name]
            per_rel.append([[frozenset(c) for c in itertools.combinations(cands, k)] for k in range(len(cands) + 1)])
        total = sum(len(c) for c in self.candidates.values())
        produced = 0
        for n in range(total + 1):
            for sizes in _compositions(n, [len(p) - 1 for p in per_rel]):
                for combo in itertools.product(*(per_rel[i][k] for i, k in enumerate(sizes))):
                    if produced >= self.bound.max_databases:
                        return
                    produced += 1
                    yield dict(zip(self.names, combo))

    def random(self) -> Iterator[dict[str, frozenset]]:
        rng = random.Random(self.bound.seed)
        for _ in range(self.bound.trials):
            yield {
                name: frozenset(t for t in self.random_candidates[name] if rng.random() < 0.5)
                for name in self.names
            }

    def __iter__(self) -> Iterator[tuple[str, dict[str, frozenset]]]:
        for inst in self.exhaustive():
            yield "exhaustive", inst
        for inst in self.random():
            yield "random", inst

    def describe(self) -> dict[str, Any]:
        return {
            **self.bound.to_dict(),
            "domains": {s: list(v) for s, v in self.domains.items()},
            "random_domains": {s: list(v) for s, v in self.random_domains.items()},
            "exhaustive_databases": min(self.exhaustive_total, self.bound.max_databases),
            "exhaustive_complete": self.exhaustive_complete,
        }


def _compositions(n: int, caps: list[int]) -> Iterator[tuple[int, ...]]:
    if not caps:
        if n == 0:
            yield ()
        return
    rest = sum(caps[1:])
    for k in range(max(0, n - rest), min(caps[0], n) + 1):
        for tail in _compositions(n - k, caps[1:]):
            yield (k, *tail)


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Outcome of a bounded comparison.

    ``status`` is ``not-equivalent`` (with a witness database on which the
    answers differ), ``equivalent-up-to-bound``, or ``inconclusive`` when the
    bound could not include every query constant.
    """

    status: str
    bound: dict[str, Any] = field(default_factory=dict)
    witness: Database | None = None
    tier: str | None = None
    left: ResultRelation | None = None
    right: ResultRelation | None = None
    difference: tuple | None = None
    reason: str | None = None

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent-up-to-bound"

    @property
    def refuted(self) -> bool:
        return self.status == "not-equivalent"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "bound": self.bound}
        if self.witness is not None:
            out["witness"] = save_database(self.witness)
            out["tier"] = self.tier
            out["left"] = self.left.to_dict()
            out["right"] = self.right.to_dict()
            out["difference"] = list(self.difference)
        if self.reason:
            out["reason"] = self.reason
        return out


def first_difference(
    left: Evaluator,
    right: Evaluator,
    space: DatabaseSpace,
    remap: Callable[[dict], dict] | None = None,
) -> tuple[str, dict, ResultRelation, ResultRelation] | None:
    """First database (canonical order) where ``left`` and ``right`` disagree.

    ``remap`` transforms the instance before it is handed to ``right``.
    """
    for tier, inst in space:
        a = left(inst)
        b = right(remap(inst) if remap else inst)
        if a.tuples != b.tuples:
            return tier, inst, a, b
    return None


def _some_difference(a: ResultRelation, b: ResultRelation) -> tuple:
    diff = sorted(a.tuples ^ b.tuples, key=lambda r: tuple((isinstance(v, str), v) for v in r))
    return diff[0]


def verdict_from(
    found: tuple[str, dict, ResultRelation, ResultRelation] | None,
    space: DatabaseSpace,
    schema: Schema,
) -> EquivalenceVerdict:
    bound = space.describe()
    if found is not None:
        tier, inst, a, b = found
        db = Database(schema, {k: v for k, v in inst.items() if k in schema})
        return EquivalenceVerdict("not-equivalent", bound, db, tier, a, b, _some_difference(a, b))
    if space.below_constants:
        return EquivalenceVerdict(
            "inconclusive",
            bound,
            reason=f"domain size {space.bound.domain_size} cannot hold the query constants {space.constant_counts}",
        )
    return EquivalenceVerdict("equivalent-up-to-bound", bound)


def equivalent_bounded(q1, q2, schema: Schema, bound: Bound = DEFAULT_BOUND) -> EquivalenceVerdict:
    """Compare ``q1`` and ``q2`` (any dialects or diagrams) on the bounded database space.

    Output schemas must have equal arity; answers are compared positionally.
    """
    from . import compile_query

    f1 = compile_query(q1, schema)
    f2 = compile_query(q2, schema)
    used = query_relations(q1) | query_relations(q2)
    sub = schema.restrict(used)
    empty = {r.name: frozenset() for r in schema}
    probe1, probe2 = f1(empty), f2(empty)
    if len(probe1.attributes) != len(probe2.attributes):
        raise SchemaError(
            f"output schemas differ: {len(probe1.attributes)} vs {len(probe2.attributes)} attributes"
        )
    space = DatabaseSpace(sub, query_constants(q1) | query_constants(q2), bound)
    missing = {r.name: frozenset() for r in schema if r.name not in used}

    def full(inst: dict) -> dict:
        return {**missing, **inst} if missing else inst

    found = first_difference(lambda i: f1(full(i)), lambda i: f2(full(i)), space)
    if found is not None:
        tier, inst, a, b = found
        found = (tier, full(inst), a, b)
    return verdict_from(found, space, schema)


def query_relations(q) -> set[str]:
    """Base relations referenced by ``q``."""
    from ..pattern import signature

    return {entry.relation for entry in signature(q)}


def query_constants(q) -> set:
    """Constants occurring anywhere in ``q``."""
    from ..ast import datalog, dialect_of, ra, sql, trc
    from ..diagram import Diagram

    if isinstance(q, Diagram):
        return q.constants()
    mod = {"trc": trc, "sql": sql, "datalog": datalog, "ra": ra}[dialect_of(q)]
    return mod.constants(q)
