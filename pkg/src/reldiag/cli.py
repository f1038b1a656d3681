"""Command-line interface: ``reldiag <subcommand> ...``.

Exit status is 0 on success, 1 when the answer is negative (violations,
invalid diagram, not equivalent, not isomorphic, inconclusive) and 2 on
usage, input, or translation errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import deque
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .ast import dialect_of
from .ast.checks import canonicalize_trc, check_guarded, classify
from .ast.datalog import anonymize_program
from .catalog import Schema, load_database
from .diagram import Diagram, from_json, normalize, validate
from .errors import ReldiagError
from .eval import Bound, equivalent_bounded, evaluate
from .parse import DIALECTS, EXTENSIONS, parse, print_query
from .pattern import pattern_isomorphic, similar_pattern
from .render import emit_dot, emit_svg, layout, parse_style
from .translate import (
    compose,
    datalog_to_ra,
    datalog_to_trc,
    diagram_to_trc,
    eliminate_disjunction,
    ra_to_datalog,
    sql_to_trc,
    trc_to_datalog,
    trc_to_diagram,
    trc_to_sql,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2
TARGETS = DIALECTS + ("diagram",)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _dialect(path: str, override: str | None) -> str:
    if override:
        return override
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "diagram"
    if suffix in EXTENSIONS:
        return EXTENSIONS[suffix]
    raise UsageError(f"cannot infer the dialect of {path}; pass --dialect")


def _load(path: str, override: str | None = None):
    dialect = _dialect(path, override)
    text = _read(path)
    if dialect == "diagram":
        return from_json(text)
    return parse(dialect, text)


def _schema(value: str | None) -> Schema | None:
    if value is None:
        return None
    text = _read(value) if Path(value).is_file() else value
    schema = Schema.parse(text)
    if not len(schema):
        raise UsageError(f"no relation declarations in schema {value!r}")
    return schema


def _need(schema: Schema | None, what: str) -> Schema:
    if schema is None:
        raise UsageError(f"{what} needs --schema")
    return schema


def _bound(args) -> Bound:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("RELDIAG_SEED", "1"))
    return Bound(domain_size=args.domain_size, trials=args.trials, random_size=args.random_size, seed=seed)


def _render_query(obj) -> str:
    if isinstance(obj, Diagram):
        return obj.to_json()
    return print_query(obj)


def _jsonable(obj) -> Any:
    if isinstance(obj, Diagram):
        return obj.to_dict()
    return print_query(obj)


def _dump(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# translation graph

Step = Callable[[Any, Schema | None, argparse.Namespace], tuple]


def _edges() -> dict[tuple[str, str], Step]:
    return {
        ("trc", "diagram"): lambda q, s, a: trc_to_diagram(q),
        ("diagram", "trc"): lambda q, s, a: diagram_to_trc(q),
        ("sql", "trc"): lambda q, s, a: sql_to_trc(q, s),
        ("trc", "sql"): lambda q, s, a: trc_to_sql(q),
        ("datalog", "trc"): lambda q, s, a: datalog_to_trc(q, _need(s, "datalog to trc")),
        ("trc", "datalog"): lambda q, s, a: trc_to_datalog(q, _need(s, "trc to datalog")),
        ("ra", "datalog"): lambda q, s, a: ra_to_datalog(q, _need(s, "ra to datalog")),
        ("datalog", "ra"): lambda q, s, a: datalog_to_ra(q, _need(s, "datalog to ra"), a.antijoin),
    }


def _route(source: str, target: str) -> list[str]:
    graph: dict[str, list[str]] = {}
    for a, b in _edges():
        graph.setdefault(a, []).append(b)
    prev = {source: None}
    todo = deque([source])
    while todo:
        cur = todo.popleft()
        for nxt in graph.get(cur, []):
            if nxt not in prev:
                prev[nxt] = cur
                todo.append(nxt)
    if target not in prev:
        raise UsageError(f"no translation from {source} to {target}")
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    return path[::-1]


def translate(q, source: str, target: str, schema: Schema | None, args) -> tuple:
    """Translate along the shortest chain of constructive steps; returns (result, trace or None)."""
    if target == "diagram" and source in ("trc", "sql"):
        report = classify(q, schema) if source == "sql" else classify(q)
        if not report.non_disjunctive:
            return eliminate_disjunction(q, schema), None
    path = _route(source, target)
    edges = _edges()
    trace = None
    for a, b in zip(path, path[1:]):
        q, step = edges[(a, b)](q, schema, args)
        trace = step if trace is None else compose(trace, step)
    return q, trace


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    q = _load(args.file, args.dialect)
    if isinstance(q, Diagram):
        raise UsageError("check expects a query; use validate for diagrams")
    schema = _schema(args.schema)
    report = classify(q, schema)
    data = {"fragment": report.to_dict()}
    if dialect_of(q) in ("trc", "sql"):
        data["guardedness"] = check_guarded(q, schema).to_dict()
    ok = report.ok
    if args.json:
        print(_dump(data))
    else:
        flags = ("non_disjunctive", "guarded", "safe", "canonical")
        print(f"dialect: {report.dialect}")
        for f in flags:
            print(f"{f.replace('_', '-')}: {'yes' if getattr(report, f) else 'no'}")
        for v in report.violations:
            where = f" at {v.span.line}:{v.span.column}" if v.span is not None else ""
            print(f"violation [{v.kind}]{where}: {v.message}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_translate(args) -> int:
    source = args.source or _dialect(args.file, None)
    q = _load(args.file, source)
    schema = _schema(args.schema)
    result, trace = translate(q, source, args.target, schema, args)
    if args.json:
        print(_dump({"result": _jsonable(result), "trace": trace.to_dict() if trace else None}))
        return EXIT_OK
    print(_render_query(result))
    if args.trace and trace is not None:
        print(file=sys.stderr)
        for s in trace.steps:
            print(f"step {s.number}: {s.description}", file=sys.stderr)
        corr = list(trace.correspondence) if trace.correspondence is not None else "none (not pattern-preserving)"
        print(f"correspondence: {corr}", file=sys.stderr)
        for n in trace.notes:
            print(f"note: {n}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    d = from_json(_read(args.file))
    report = validate(d, _schema(args.schema))
    if args.json:
        print(_dump(report.to_dict()))
    else:
        if report.ok:
            print("valid")
        for v in report.violations:
            print(f"condition {v.condition} (cell {v.cell}): {v.message}")
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_render(args) -> int:
    obj = _load(args.file, args.dialect)
    if not isinstance(obj, Diagram):
        obj, _ = translate(obj, dialect_of(obj), "diagram", _schema(args.schema), args)
    style = parse_style(_read(args.style)) if args.style else None
    if args.format == "svg":
        text = emit_svg(layout(obj, style) if style else layout(obj))
    else:
        text = emit_dot(obj, style) if style else emit_dot(obj)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    q = _load(args.query, args.dialect)
    db = load_database(_read(args.db))
    result = evaluate(q, db)
    if args.json:
        print(_dump(result.to_dict()))
    elif result.is_boolean:
        print("true" if result.truth else "false")
    else:
        print("\t".join(result.attributes))
        for row in result.sorted_rows():
            print("\t".join(str(v) for v in row))
    return EXIT_OK


def cmd_equiv(args) -> int:
    q1, q2 = _load(args.q1, args.dialect), _load(args.q2, args.dialect2 or args.dialect)
    schema = _need(_schema(args.schema), "equiv")
    verdict = equivalent_bounded(q1, q2, schema, _bound(args))
    if args.json:
        print(_dump(verdict.to_dict()))
    else:
        print(verdict.status)
        if verdict.witness is not None:
            print("witness database:")
            print(verdict.to_dict()["witness"], end="")
    return EXIT_OK if verdict.equivalent else EXIT_NEGATIVE


def _print_iso(verdict, as_json: bool) -> int:
    if as_json:
        print(_dump(verdict.to_dict()))
    else:
        data = verdict.to_dict()
        print(verdict.status)
        print(f"signatures: {data['signatures'][0]} / {data['signatures'][1]}")
        if verdict.permutation is not None:
            print(f"permutation: {list(verdict.permutation)}")
        if verdict.mapping is not None:
            print(f"mapping: {json.dumps(verdict.mapping.to_dict(), sort_keys=True)}")
        if verdict.reason:
            print(f"reason: {verdict.reason}")
        for w in data.get("witnesses", []):
            print(f"permutation {w['permutation']} refuted; witness database:")
            print(w["witness"], end="")
    return EXIT_OK if verdict.isomorphic else EXIT_NEGATIVE


def cmd_pattern(args) -> int:
    q1, q2 = _load(args.q1, args.dialect), _load(args.q2, args.dialect2 or args.dialect)
    if args.mode == "iso":
        verdict = pattern_isomorphic(q1, q2, _need(_schema(args.schema), "pattern iso"), _bound(args))
    else:
        s1 = _need(_schema(args.schema1 or args.schema), "pattern similar (first query)")
        s2 = _need(_schema(args.schema2 or args.schema), "pattern similar (second query)")
        verdict = similar_pattern(q1, s1, q2, s2, _bound(args))
    return _print_iso(verdict, args.json)


def cmd_canon(args) -> int:
    q = _load(args.file, args.dialect)
    kind = "diagram" if isinstance(q, Diagram) else dialect_of(q)
    if kind == "trc":
        out = canonicalize_trc(q)
    elif kind == "sql":
        out, _ = trc_to_sql(sql_to_trc(q, _schema(args.schema))[0])
    elif kind == "datalog":
        out = anonymize_program(q)
    elif kind == "ra":
        out = q
    else:
        out = normalize(q)
    if args.json:
        print(_dump({"result": _jsonable(out)}))
    else:
        print(_render_query(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _bound_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("bounded oracle")
    g.add_argument("--domain-size", type=_positive, default=2, help="exhaustive active-domain size (default 2)")
    g.add_argument("--trials", type=_nonnegative, default=100, help="random databases (default 100)")
    g.add_argument("--random-size", type=_positive, default=3, help="random-database domain size (default 3)")
    g.add_argument("--seed", type=int, default=None, help="random seed (default $RELDIAG_SEED or 1)")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must not be negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reldiag", description="Relational query fragments and Relational Diagrams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p: argparse.ArgumentParser, dialect: bool = True) -> None:
        if dialect:
            p.add_argument("--dialect", choices=DIALECTS + ("diagram",), help="override the dialect inferred from the extension")
        p.add_argument("--schema", help="schema text such as 'R(A,B); S(B)' or a file holding it")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check", help="fragment membership and guardedness report")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("translate", help="translate between dialects and diagrams")
    p.add_argument("file")
    p.add_argument("--from", dest="source", choices=TARGETS)
    p.add_argument("--to", dest="target", choices=TARGETS, required=True)
    p.add_argument("--antijoin", action="store_true", help="use the antijoin operator for datalog to ra")
    p.add_argument("--trace", action="store_true", help="print the translation steps to stderr")
    common(p, dialect=False)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("validate", help="check a diagram's validity conditions")
    p.add_argument("file")
    common(p, dialect=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="draw a diagram (or a query) as SVG or DOT")
    p.add_argument("file")
    p.add_argument("--format", choices=("svg", "dot"), default="svg")
    p.add_argument("--style", help="style file of key=value lines")
    p.add_argument("-o", "--output", help="write to a file instead of stdout")
    common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="evaluate a query on a database file")
    p.add_argument("query")
    p.add_argument("--db", required=True)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("equiv", help="bounded logical equivalence of two queries")
    p.add_argument("q1")
    p.add_argument("q2")
    p.add_argument("--dialect2", choices=DIALECTS + ("diagram",))
    common(p)
    _bound_flags(p)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("pattern", help="pattern isomorphism and similarity")
    p.add_argument("mode", choices=("iso", "similar"))
    p.add_argument("q1")
    p.add_argument("q2")
    p.add_argument("--dialect2", choices=DIALECTS + ("diagram",))
    p.add_argument("--schema1", help="schema of the first query (similar)")
    p.add_argument("--schema2", help="schema of the second query (similar)")
    common(p)
    _bound_flags(p)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("canon", help="print the canonical form of a query or diagram")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_canon)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ReldiagError, ValueError) as exc:
        print(f"reldiag: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
