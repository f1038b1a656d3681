"""Relational schemas and finite set-semantics database instances.

Values are plain Python ``int`` or ``str`` objects. Each attribute carries a
sort (``"int"`` or ``"str"``); comparisons across sorts are rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import SchemaError, SortError

Value = Union[int, str]
SORTS = ("int", "str")


def sort_of(value: object) -> str:
    if isinstance(value, bool) or value is None:
        raise SortError(f"unsupported value {value!r}")
    if isinstance(value, int):
        return "int"
    if isinstance(value, str):
        return "str"
    raise SortError(f"unsupported value {value!r}")


@dataclass(frozen=True)
class Attribute:
    name: str
    sort: str = "int"

    def __post_init__(self) -> None:
        if self.sort not in SORTS:
            raise SchemaError(f"unknown sort {self.sort!r} for attribute {self.name}")


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise SchemaError(f"relation {self.name} must have at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute name in relation {self.name}")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(a.sort for a in self.attributes)

    def index(self, attr: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == attr:
                return i
        raise SchemaError(f"relation {self.name} has no attribute {attr}")

    def sort(self, attr: str) -> str:
        return self.attributes[self.index(attr)].sort

    def renamed(self, name: str) -> RelationSchema:
        return RelationSchema(name, self.attributes)

    def __str__(self) -> str:
        cols = ", ".join(f"{a.name}:{a.sort}" for a in self.attributes)
        return f"{self.name}({cols})"


@dataclass(frozen=True)
class Schema:
    """Ordered collection of relation schemas with unique names."""

    relations: tuple[RelationSchema, ...] = ()
    _index: Mapping[str, RelationSchema] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, RelationSchema] = {}
        for rel in self.relations:
            if rel.name in index:
                raise SchemaError(f"duplicate relation {rel.name}")
            index[rel.name] = rel
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, spec: Mapping[str, Sequence[str | tuple[str, str]]]) -> Schema:
        """Build from ``{"R": ["A", ("B", "str")]}``; bare names default to ``int``."""
        rels = []
        for name, attrs in spec.items():
            cols = [Attribute(a) if isinstance(a, str) else Attribute(*a) for a in attrs]
            rels.append(RelationSchema(name, tuple(cols)))
        return cls(tuple(rels))

    @classmethod
    def parse(cls, text: str) -> Schema:
        """Parse ``R(A:int, B:str); S(B)`` style declarations (sort defaults to int)."""
        rels = []
        for m in re.finditer(r"(\w+)\s*\(([^)]*)\)", text):
            cols = []
            for part in m.group(2).split(","):
                part = part.strip()
                if not part:
                    continue
                name, _, sort = part.partition(":")
                cols.append(Attribute(name.strip(), sort.strip() or "int"))
            rels.append(RelationSchema(m.group(1), tuple(cols)))
        return cls(tuple(rels))

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[RelationSchema]:
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def relation(self, name: str) -> RelationSchema:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name}") from None

    def restrict(self, names: Iterable[str]) -> Schema:
        wanted = set(names)
        for n in wanted:
            self.relation(n)
        return Schema(tuple(r for r in self.relations if r.name in wanted))

    def extended(self, relations: Iterable[RelationSchema]) -> Schema:
        extra = [r for r in relations if r.name not in self._index]
        return Schema(self.relations + tuple(extra))

    def __str__(self) -> str:
        return "; ".join(str(r) for r in self.relations)


Row = tuple


@dataclass(frozen=True)
class Database:
    """Finite instance of a schema; every relation maps to a frozenset of tuples."""

    schema: Schema
    tuples: Mapping[str, frozenset]

    def __post_init__(self) -> None:
        data: dict[str, frozenset] = {}
        for rel in self.schema:
            rows = self.tuples.get(rel.name, frozenset())
            checked = frozenset(_check_row(rel, tuple(r)) for r in rows)
            data[rel.name] = checked
        for name in self.tuples:
            if name not in self.schema:
                raise SchemaError(f"unknown relation {name}")
        object.__setattr__(self, "tuples", data)

    @classmethod
    def empty(cls, schema: Schema) -> Database:
        return cls(schema, {})

    @classmethod
    def of(cls, schema: Schema, rows: Mapping[str, Iterable[Sequence[Value]]]) -> Database:
        return cls(schema, {k: frozenset(tuple(r) for r in v) for k, v in rows.items()})

    def __getitem__(self, name: str) -> frozenset:
        self.schema.relation(name)
        return self.tuples[name]

    def size(self) -> int:
        return sum(len(v) for v in self.tuples.values())

    def with_rows(self, name: str, rows: Iterable[Sequence[Value]]) -> Database:
        data = dict(self.tuples)
        data[name] = frozenset(tuple(r) for r in rows)
        return Database(self.schema, data)


def _check_row(rel: RelationSchema, row: tuple) -> tuple:
    if len(row) != rel.arity:
        raise SchemaError(f"arity mismatch for {rel.name}: expected {rel.arity}, got {len(row)}")
    for value, attr in zip(row, rel.attributes):
        if value is None:
            raise SchemaError(f"null value in relation {rel.name}")
        if sort_of(value) != attr.sort:
            raise SortError(
                f"sort mismatch in {rel.name}.{attr.name}: expected {attr.sort}, got {value!r}"
            )
    return row


def active_domain(db: Database, sort: str | None = None) -> set:
    """All values of ``sort`` (or of every sort when ``None``) occurring in ``db``."""
    out: set = set()
    for rel in db.schema:
        for i, attr in enumerate(rel.attributes):
            if sort is not None and attr.sort != sort:
                continue
            out.update(row[i] for row in db.tuples[rel.name])
    return out


# ---------------------------------------------------------------------------
# Database file format

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<int>-?\d+)
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[(),:])
      | (?P<comment>\#.*)
    )""",
    re.VERBOSE,
)


def _tokens(line: str, lineno: int) -> list[tuple[str, object]]:
    pos, out = 0, []
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        m = _TOKEN.match(line, pos)
        if m is None or m.end() == pos:
            raise SchemaError(f"line {lineno}: unexpected character {line[pos:].strip()[:1]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "comment":
            break
        text = m.group(kind)
        if kind == "string":
            out.append(("value", json.loads(text)))
        elif kind == "int":
            out.append(("value", int(text)))
        else:
            out.append((kind, text))
    return out


def load_database(text: str, schema: Schema | None = None) -> Database:
    """Parse the line-oriented database format.

    ``relation R(A:int, B:str)`` declares a relation, ``R(1, "red")`` adds a
    row. A pre-built ``schema`` may be supplied instead of (or in addition to)
    header lines.
    """
    rels: list[RelationSchema] = list(schema.relations) if schema else []
    known = {r.name: r for r in rels}
    rows: dict[str, set] = {r.name: set() for r in rels}
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _tokens(line, lineno)
        if not toks:
            continue
        if toks[0] == ("word", "relation"):
            rel = _parse_header(toks[1:], lineno)
            if rel.name in known and known[rel.name] != rel:
                raise SchemaError(f"line {lineno}: conflicting declaration of {rel.name}")
            if rel.name not in known:
                rels.append(rel)
                known[rel.name] = rel
                rows[rel.name] = set()
            continue
        name, values = _parse_row(toks, lineno)
        if name not in known:
            raise SchemaError(f"line {lineno}: unknown relation {name}")
        try:
            rows[name].add(_check_row(known[name], tuple(values)))
        except SchemaError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    return Database(Schema(tuple(rels)), {k: frozenset(v) for k, v in rows.items()})


def load_schema(text: str) -> Schema:
    """Schema declared by the header lines of a database file (rows are checked too)."""
    return load_database(text).schema


def _parse_header(toks: list, lineno: int) -> RelationSchema:
    if len(toks) < 3 or toks[0][0] != "word" or toks[1] != ("punct", "("):
        raise SchemaError(f"line {lineno}: malformed relation header")
    name = toks[0][1]
    attrs: list[Attribute] = []
    i = 2
    while True:
        if toks[i][0] != "word":
            raise SchemaError(f"line {lineno}: expected attribute name")
        attr = toks[i][1]
        sort = "int"
        i += 1
        if toks[i] == ("punct", ":"):
            if i + 1 >= len(toks) or toks[i + 1][0] != "word":
                raise SchemaError(f"line {lineno}: expected sort after ':'")
            sort = toks[i + 1][1]
            i += 2
        attrs.append(Attribute(attr, sort))
        if toks[i] == ("punct", ","):
            i += 1
            continue
        if toks[i] == ("punct", ")") and i == len(toks) - 1:
            break
        raise SchemaError(f"line {lineno}: malformed relation header")
    return RelationSchema(name, tuple(attrs))


def _parse_row(toks: list, lineno: int) -> tuple[str, list]:
    if len(toks) < 3 or toks[0][0] != "word" or toks[1] != ("punct", "(") or toks[-1] != ("punct", ")"):
        raise SchemaError(f"line {lineno}: malformed row")
    values: list = []
    body = toks[2:-1]
    for i, tok in enumerate(body):
        if i % 2 == 1:
            if tok != ("punct", ","):
                raise SchemaError(f"line {lineno}: expected ','")
            continue
        if tok == ("word", "null") or tok == ("word", "NULL"):
            raise SchemaError(f"line {lineno}: null value")
        if tok[0] != "value":
            raise SchemaError(f"line {lineno}: expected a value, got {tok[1]!r}")
        values.append(tok[1])
    if body and len(body) % 2 == 0:
        raise SchemaError(f"line {lineno}: trailing ','")
    return toks[0][1], values


def format_value(value: Value) -> str:
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def _row_key(row: tuple) -> tuple:
    return tuple((0, v, "") if isinstance(v, int) else (1, 0, v) for v in row)


def save_database(db: Database) -> str:
    """Serialize with relations in schema order and rows sorted."""
    lines = []
    for rel in db.schema:
        cols = ", ".join(f"{a.name}:{a.sort}" for a in rel.attributes)
        lines.append(f"relation {rel.name}({cols})")
    for rel in db.schema:
        for row in sorted(db.tuples[rel.name], key=_row_key):
            lines.append(f"{rel.name}({', '.join(format_value(v) for v in row)})")
    return "\n".join(lines) + "\n"
