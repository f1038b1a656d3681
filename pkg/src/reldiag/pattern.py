"""Query signatures, dissociation and pattern isomorphism.

Two logically equivalent queries share a pattern when renaming every table
reference to a fresh relation (dissociation) keeps them equivalent under
some pairing of references that respects base relations. Equivalence is
decided by the bounded oracle, so a positive verdict is evidence up to the
bound while a negative one always carries a witness database.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterator

from .ast import datalog, dialect_of, ra, sql, trc
from .catalog import Schema, sort_of
from .diagram import Diagram
from .errors import SourceSpan
from .eval import compile_query
from .eval.common import ResultRelation
from .eval.oracle import (
    DEFAULT_BOUND,
    Bound,
    DatabaseSpace,
    EquivalenceVerdict,
    equivalent_bounded,
    first_difference,
    query_constants,
    verdict_from,
)

MAX_PERMUTATIONS = 10_000
MAX_MAPPINGS = 10_000


@dataclass(frozen=True)
class SignatureEntry:
    relation: str
    span: SourceSpan | None = None
    label: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"relation": self.relation}
        if self.label is not None:
            out["table"] = self.label
        if self.span is not None:
            out["line"], out["column"] = self.span.line, self.span.column
        return out


def signature(q) -> list[SignatureEntry]:
    """Table references of ``q`` in expression order (IDBs and output tables excluded)."""
    if isinstance(q, Diagram):
        return [SignatureEntry(t.relation, None, t.id) for cell in q.cells for t in cell.tables]
    kind = dialect_of(q)
    if kind == "trc":
        return [SignatureEntry(x.relation, x.span) for x in trc.quantifiers(q)]
    if kind == "sql":
        return [SignatureEntry(t.relation, t.span) for t in sql.table_refs(q)]
    if kind == "datalog":
        return [SignatureEntry(a.predicate, a.span) for a in datalog.edb_atoms(q)]
    return [SignatureEntry(n.name, n.span) for n in ra.leaves(q)]


def _rename(q, names: list[str]):
    if isinstance(q, Diagram):
        it = iter(names)
        cells = tuple(
            replace(cell, tables=tuple(replace(t, relation=next(it)) for t in cell.tables)) for cell in q.cells
        )
        return replace(q, cells=cells)
    kind = dialect_of(q)
    if kind == "trc":
        return trc.rename_relations(q, names)
    if kind == "sql":
        return sql.rename_relations(q, names)
    if kind == "datalog":
        return datalog.rename_edbs(q, names)
    return ra.rename_relations(q, names)


@dataclass(frozen=True)
class DissociatedQuery:
    """``query`` with its i-th table reference renamed to ``names[i]``."""

    query: Any
    names: tuple[str, ...]
    original: tuple[str, ...]
    schema: Schema | None = None


def dissociate(q, schema: Schema | None = None) -> DissociatedQuery:
    """Give every table reference its own relation ``<Base><i>`` (1-based, global index).

    With ``schema``, the result also carries a schema in which each fresh
    relation copies its base relation's attributes.
    """
    original = tuple(e.relation for e in signature(q))
    taken = set(original)
    if schema is not None:
        taken |= set(schema.names)
    if isinstance(q, datalog.Program):
        taken |= set(q.idbs)
    names = []
    for i, base in enumerate(original, 1):
        name = f"{base}{i}"
        while name in taken:
            name = f"{base}_{i}" if "_" not in name[len(base):] else name + "_"
        taken.add(name)
        names.append(name)
    extended = None
    if schema is not None:
        extended = schema.extended(schema.relation(b).renamed(n) for b, n in zip(original, names))
    return DissociatedQuery(_rename(q, names), tuple(names), original, extended)


# ---------------------------------------------------------------------------
# schema mappings


@dataclass(frozen=True)
class SchemaMapping:
    """Bijection from the relations, attributes and constants of one query to another's.

    ``attributes[R]`` lists, for each attribute of ``R`` in declaration
    order, the attribute of ``relations[R]`` it maps to.
    """

    relations: dict[str, str]
    attributes: dict[str, tuple[tuple[str, str], ...]]
    constants: dict = field(default_factory=dict)

    @classmethod
    def identity(cls, schema: Schema, names) -> SchemaMapping:
        rels = {n: n for n in names}
        attrs = {n: tuple((a, a) for a in schema.relation(n).attribute_names) for n in names}
        return cls(rels, attrs, {})

    def is_identity(self) -> bool:
        return (
            all(k == v for k, v in self.relations.items())
            and all(a == b for pairs in self.attributes.values() for a, b in pairs)
            and all(k == v for k, v in self.constants.items())
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "relations": dict(self.relations),
            "attributes": {r: {a: b for a, b in pairs} for r, pairs in self.attributes.items()},
            "constants": [[k, v] for k, v in self.constants.items()],
        }


def _value_bijection(constants: dict, domain: list) -> Callable:
    """Extend the constant map to a bijection of ``domain`` plus the constants' images."""
    if not constants:
        return lambda v: v
    values = sorted(set(domain) | set(constants) | set(constants.values()), key=lambda v: (isinstance(v, str), v))
    mapping = dict(constants)
    free_in = [v for v in values if v not in mapping]
    free_out = [v for v in values if v not in set(mapping.values())]
    for a, b in zip(free_in, free_out):
        mapping[a] = b
    return lambda v: mapping.get(v, v)


class _Transfer:
    """Moves instances over the first schema to the second under a mapping."""

    def __init__(self, mapping: SchemaMapping, schema1: Schema, schema2: Schema, value: Callable):
        self.value = value
        self.plan: dict[str, tuple[str, tuple[int, ...]]] = {}
        for r1, r2 in mapping.relations.items():
            rel1, rel2 = schema1.relation(r1), schema2.relation(r2)
            target = dict(mapping.attributes[r1])
            # position in R2 of each R2 attribute's source position in R1
            order = tuple(rel1.index(next(a for a, b in target.items() if b == name)) for name in rel2.attribute_names)
            self.plan[r1] = (r2, order)

    def rows(self, rows: frozenset, order: tuple[int, ...]) -> frozenset:
        v = self.value
        return frozenset(tuple(v(t[i]) for i in order) for t in rows)

    def result(self, r: ResultRelation) -> ResultRelation:
        v = self.value
        return ResultRelation(r.attributes, frozenset(tuple(v(x) for x in t) for t in r.tuples))


# ---------------------------------------------------------------------------
# isomorphism


@dataclass(frozen=True)
class IsomorphismVerdict:
    """``isomorphic`` (with the first accepted permutation), ``not-isomorphic`` or ``inconclusive``.

    ``permutation[i]`` is the reference of the second query paired with the
    i-th reference of the first. ``witnesses`` lists, per rejected
    permutation, the bounded-equivalence verdict that refuted it.
    """

    status: str
    permutation: tuple[int, ...] | None = None
    bound: dict[str, Any] = field(default_factory=dict)
    witnesses: tuple[tuple[tuple[int, ...], EquivalenceVerdict], ...] = ()
    reason: str | None = None
    signatures: tuple[tuple[str, ...], tuple[str, ...]] = ((), ())
    equivalence: EquivalenceVerdict | None = None
    mapping: SchemaMapping | None = None

    @property
    def isomorphic(self) -> bool:
        return self.status == "isomorphic"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "status": self.status,
            "signatures": [list(s) for s in self.signatures],
            "bound": self.bound,
        }
        if self.permutation is not None:
            out["permutation"] = list(self.permutation)
        if self.witnesses:
            out["witnesses"] = [{"permutation": list(p), **v.to_dict()} for p, v in self.witnesses]
        if self.equivalence is not None:
            out["equivalence"] = self.equivalence.to_dict()
        if self.mapping is not None:
            out["mapping"] = self.mapping.to_dict()
        if self.reason:
            out["reason"] = self.reason
        return out


def _permutations(sig1: tuple[str, ...], sig2: tuple[str, ...], rel: dict[str, str]) -> Iterator[tuple[int, ...]]:
    """Reference pairings respecting ``rel``, in lexicographic order."""
    n = len(sig1)
    used = [False] * n

    def go(i: int, acc: list[int]):
        if i == n:
            yield tuple(acc)
            return
        for j in range(n):
            if not used[j] and sig2[j] == rel[sig1[i]]:
                used[j] = True
                acc.append(j)
                yield from go(i + 1, acc)
                acc.pop()
                used[j] = False

    yield from go(0, [])


def _count_permutations(sig1: tuple[str, ...]) -> int:
    total = 1
    for name in set(sig1):
        total *= _factorial(sig1.count(name))
    return total


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _output_arity(q, schema: Schema) -> int:
    f = compile_query(q, schema)
    return len(f({r.name: frozenset() for r in schema}).attributes)


def _check(
    q1, schema1: Schema, q2, schema2: Schema, mapping: SchemaMapping, bound: Bound, prefer: tuple[int, ...] | None = None
) -> IsomorphismVerdict:
    sig1 = tuple(e.relation for e in signature(q1))
    sig2 = tuple(e.relation for e in signature(q2))
    sigs = (sig1, sig2)
    if len(sig1) != len(sig2):
        return IsomorphismVerdict(
            "not-isomorphic", signatures=sigs, mapping=mapping,
            reason=f"signatures have {len(sig1)} and {len(sig2)} table references",
        )
    if sorted(mapping.relations.get(r, "") for r in sig1) != sorted(sig2):
        return IsomorphismVerdict(
            "not-isomorphic", signatures=sigs, mapping=mapping,
            reason="signatures reference different relations",
        )
    a1, a2 = _output_arity(q1, schema1), _output_arity(q2, schema2)
    if a1 != a2:
        return IsomorphismVerdict(
            "not-isomorphic", signatures=sigs, mapping=mapping, reason=f"output arities differ ({a1} vs {a2})"
        )
    inverse = {v: k for k, v in mapping.constants.items()}
    consts = query_constants(q1) | {inverse.get(c, c) for c in query_constants(q2)}

    # undissociated equivalence first
    used1 = sorted(set(sig1))
    space = DatabaseSpace(schema1.restrict(used1), consts, bound)
    domain = [v for vals in space.random_domains.values() for v in vals]
    transfer = _Transfer(mapping, schema1, schema2, _value_bijection(mapping.constants, domain))
    f1, f2 = compile_query(q1, schema1), compile_query(q2, schema2)
    empty1 = {r.name: frozenset() for r in schema1}
    empty2 = {r.name: frozenset() for r in schema2}

    def move(inst: dict, pairs) -> dict:
        out = dict(empty2)
        for src, dst, order in pairs:
            out[dst] = transfer.rows(inst[src], order)
        return out

    plain = [(r, *transfer.plan[r]) for r in used1]
    found = first_difference(
        lambda i: transfer.result(f1({**empty1, **i})), f2, space, lambda i: move(i, plain)
    )
    equivalence = verdict_from(found, space, schema1)
    if equivalence.refuted:
        return IsomorphismVerdict(
            "not-isomorphic", bound=space.describe(), signatures=sigs, equivalence=equivalence, mapping=mapping,
            reason="the queries are not logically equivalent",
        )
    count = _count_permutations(sig1)
    if count > MAX_PERMUTATIONS:
        return IsomorphismVerdict(
            "inconclusive", signatures=sigs, equivalence=equivalence, mapping=mapping,
            reason=f"{count} candidate permutations exceed the cap of {MAX_PERMUTATIONS}",
        )
    d1 = dissociate(q1, schema1)
    d2 = dissociate(q2, schema2)
    g1 = compile_query(d1.query, d1.schema)
    g2 = compile_query(d2.query, d2.schema)
    dspace = DatabaseSpace(d1.schema.restrict(d1.names), consts, bound)
    empty1 = {r.name: frozenset() for r in d1.schema}
    empty2 = {r.name: frozenset() for r in d2.schema}
    cache: dict[int, ResultRelation] = {}
    counter = itertools.count()

    def left(inst: dict) -> ResultRelation:
        # the space is replayed in the same order for every permutation
        k = next(counter)
        if k not in cache:
            cache[k] = transfer.result(g1({**empty1, **inst}))
        return cache[k]

    witnesses = []
    candidates = _permutations(sig1, sig2, mapping.relations)
    if prefer is not None:
        prefer = tuple(prefer)
        candidates = itertools.chain([prefer], (p for p in candidates if p != prefer))
    for perm in candidates:
        counter = itertools.count()
        pairs = [(d1.names[i], d2.names[j], transfer.plan[sig1[i]][1]) for i, j in enumerate(perm)]
        found = first_difference(left, g2, dspace, lambda i, pairs=pairs: move(i, pairs))
        verdict = verdict_from(found, dspace, d1.schema)
        if verdict.refuted:
            witnesses.append((perm, verdict))
            continue
        status = "inconclusive" if verdict.status == "inconclusive" else "isomorphic"
        return IsomorphismVerdict(
            status, perm, dspace.describe(), tuple(witnesses), verdict.reason, sigs, equivalence, mapping
        )
    return IsomorphismVerdict(
        "not-isomorphic", None, dspace.describe(), tuple(witnesses),
        "every permutation has a witness", sigs, equivalence, mapping,
    )


def pattern_isomorphic(
    q1, q2, schema: Schema, bound: Bound = DEFAULT_BOUND, prefer: tuple[int, ...] | None = None
) -> IsomorphismVerdict:
    """Decide (up to ``bound``) whether ``q1`` and ``q2`` share a query pattern.

    Queries may be in any dialect or diagrams, over the same schema.
    ``prefer`` (for example a translation trace's correspondence) is tried
    before the other permutations, so it is the one reported when it holds.
    """
    names = {e.relation for e in signature(q1)} | {e.relation for e in signature(q2)}
    for n in names:
        schema.relation(n)
    if prefer is not None:
        sig1 = [e.relation for e in signature(q1)]
        sig2 = [e.relation for e in signature(q2)]
        if sorted(prefer) != list(range(len(sig2))) or len(prefer) != len(sig1) or any(
            sig2[j] != sig1[i] for i, j in enumerate(prefer)
        ):
            raise ValueError(f"{tuple(prefer)} is not a relation-respecting permutation")
    return _check(q1, schema, q2, schema, SchemaMapping.identity(schema, names), bound, prefer)


def check_permutation(
    q1, q2, schema: Schema, permutation: tuple[int, ...], bound: Bound = DEFAULT_BOUND
) -> EquivalenceVerdict:
    """Bounded equivalence of the dissociated queries under one fixed reference pairing.

    ``permutation[i]`` is the reference of ``q2`` paired with the i-th
    reference of ``q1``; the pairing must respect base relations.
    """
    d1 = dissociate(q1, schema)
    sig2 = [e.relation for e in signature(q2)]
    if sorted(permutation) != list(range(len(sig2))) or len(permutation) != len(d1.names):
        raise ValueError(f"{permutation} is not a permutation of {len(sig2)} references")
    names = [""] * len(sig2)
    for i, j in enumerate(permutation):
        if sig2[j] != d1.original[i]:
            raise ValueError(f"reference {i} ({d1.original[i]}) cannot pair with {j} ({sig2[j]})")
        names[j] = d1.names[i]
    return equivalent_bounded(d1.query, _rename(q2, names), d1.schema, bound)


def _mappings(q1, schema1: Schema, q2, schema2: Schema) -> Iterator[SchemaMapping]:
    sig1 = [e.relation for e in signature(q1)]
    sig2 = [e.relation for e in signature(q2)]
    rels1 = list(dict.fromkeys(sig1))
    rels2 = list(dict.fromkeys(sig2))
    if len(rels1) != len(rels2):
        return
    consts1 = sorted(query_constants(q1), key=lambda v: (isinstance(v, str), v))
    consts2 = sorted(query_constants(q2), key=lambda v: (isinstance(v, str), v))

    def attr_maps(r1: str, r2: str) -> list[tuple[tuple[str, str], ...]]:
        a, b = schema1.relation(r1), schema2.relation(r2)
        if a.arity != b.arity:
            return []
        out = []
        for perm in itertools.permutations(range(b.arity)):
            if all(a.sorts[i] == b.sorts[perm[i]] for i in range(a.arity)):
                out.append(tuple((a.attribute_names[i], b.attribute_names[perm[i]]) for i in range(a.arity)))
        return out

    def const_maps() -> Iterator[dict]:
        if len(consts1) != len(consts2):
            return
        for perm in itertools.permutations(consts2):
            if all(sort_of(x) == sort_of(y) for x, y in zip(consts1, perm)):
                yield dict(zip(consts1, perm))

    def rel_maps(i: int, acc: dict) -> Iterator[dict]:
        if i == len(rels1):
            yield dict(acc)
            return
        r1 = rels1[i]
        for r2 in rels2:
            if r2 in acc.values() or sig1.count(r1) != sig2.count(r2):
                continue
            if schema1.relation(r1).arity != schema2.relation(r2).arity:
                continue
            acc[r1] = r2
            yield from rel_maps(i + 1, acc)
            del acc[r1]

    for rels in rel_maps(0, {}):
        options = [attr_maps(r, rels[r]) for r in rels1]
        for attrs in itertools.product(*options):
            for consts in const_maps():
                yield SchemaMapping(dict(rels), dict(zip(rels1, attrs)), consts)


def similar_pattern(
    q1, schema1: Schema, q2, schema2: Schema, bound: Bound = DEFAULT_BOUND
) -> IsomorphismVerdict:
    """Search for a schema mapping under which ``q1`` and ``q2`` are pattern-isomorphic.

    Returns the first isomorphic verdict (carrying the mapping), an
    inconclusive one when the search is cut off, or not-isomorphic when every
    mapping fails.
    """
    tried = 0
    last = None
    for mapping in _mappings(q1, schema1, q2, schema2):
        tried += 1
        if tried > MAX_MAPPINGS:
            return IsomorphismVerdict("inconclusive", reason=f"more than {MAX_MAPPINGS} schema mappings")
        verdict = _check(q1, schema1, q2, schema2, mapping, bound)
        if verdict.status != "not-isomorphic":
            return verdict
        last = verdict
    sigs = (
        tuple(e.relation for e in signature(q1)),
        tuple(e.relation for e in signature(q2)),
    )
    reason = f"none of {tried} schema mappings makes the queries pattern-isomorphic"
    if last is None:
        reason = "no arity- and sort-compatible schema mapping exists"
    return IsomorphismVerdict("not-isomorphic", signatures=sigs, reason=reason)


__all__ = [
    "DissociatedQuery",
    "IsomorphismVerdict",
    "SchemaMapping",
    "SignatureEntry",
    "check_permutation",
    "dissociate",
    "pattern_isomorphic",
    "signature",
    "similar_pattern",
]
