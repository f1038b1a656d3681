import json
import xml.etree.ElementTree as ET

import pytest

from fixtures import DIVISION_QUERIES, FIXTURES, ISO_Q1, ISO_Q2, UNION_TRC
from reldiag.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, run

SCHEMA = "R(A,B); S(B)"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_check_reports_fragment(files, capsys):
    path = files("q.trc", FIXTURES["division1"].text)
    assert run(["check", path]) == EXIT_OK
    out = capsys.readouterr().out
    assert "guarded: yes" in out and "non-disjunctive: yes" in out


def test_check_flags_unguarded_query(files, capsys):
    path = files("q.trc", "{q(A) | exists r in R [q.A = r.A and not (exists s in S [r.A < 5])]}")
    assert run(["check", path, "--json"]) == EXIT_NEGATIVE
    data = json.loads(capsys.readouterr().out)
    assert data["guardedness"]["violations"][0]["kind"] == "unguarded"


def test_translate_ra_to_datalog_with_trace(files, capsys):
    path = files("q.ra", DIVISION_QUERIES["ra"][1])
    assert run(["translate", path, "--to", "datalog", "--schema", SCHEMA, "--trace"]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out == "I1(a) :- R(a, _), S(b), not R(a, b).\nQ(a) :- R(a, _), not I1(a).\n"
    assert "correspondence: [3, 0, 1, 2]" in captured.err


def test_translate_chains_steps(files, capsys):
    path = files("q.sql", DIVISION_QUERIES["sql_c"][1])
    assert run(["translate", path, "--to", "diagram", "--schema", SCHEMA, "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["trace"]["pattern_preserving"]
    assert data["result"]["v"] == 1


def test_translate_disjunction_to_diagram(files, capsys):
    path = files("q.trc", UNION_TRC)
    assert run(["translate", path, "--to", "diagram", "--schema", "R(A); S(A)"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["cells"]) == 2


def test_translation_error_exit_code(files, capsys):
    path = files("q.ra", "union(R, S)")
    assert run(["translate", path, "--to", "datalog", "--schema", "R(A); S(A)"]) == EXIT_ERROR
    assert "union" in capsys.readouterr().err


def test_validate_and_render(files, capsys):
    src = files("q.trc", FIXTURES["division1"].text)
    run(["translate", src, "--to", "diagram"])
    diagram = files("d.json", capsys.readouterr().out)
    assert run(["validate", diagram, "--schema", SCHEMA]) == EXIT_OK
    assert capsys.readouterr().out == "valid\n"
    assert run(["render", diagram]) == EXIT_OK
    ET.fromstring(capsys.readouterr().out)
    assert run(["render", src, "--format", "dot"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("digraph")


def test_render_to_file_with_style(files, tmp_path):
    src = files("q.trc", FIXTURES["division1"].text)
    style = files("style.txt", "header_fill = #123456\n")
    out = tmp_path / "out.svg"
    assert run(["render", src, "--style", style, "-o", str(out)]) == EXIT_OK
    assert "#123456" in out.read_text()


def test_validate_reports_conditions(files, capsys):
    bad = '{"v": 1, "cells": [{"partitions": [{"id": "p0"}, {"id": "p1"}], "tables": [], "edges": []}]}'
    assert run(["validate", files("d.json", bad)]) == EXIT_NEGATIVE
    assert "condition 1" in capsys.readouterr().out


def test_eval(files, capsys):
    q = files("q.dl", DIVISION_QUERIES["datalog"][1])
    db = files("db.txt", "relation R(A, B)\nrelation S(B)\nR(1, 1)\nR(1, 2)\nR(2, 1)\nS(1)\nS(2)\n")
    assert run(["eval", q, "--db", db]) == EXIT_OK
    assert capsys.readouterr().out == "x\n1\n"


def test_equiv(files, capsys):
    a = files("a.trc", FIXTURES["division1"].text)
    b = files("b.sql", DIVISION_QUERIES["sql_c"][1])
    assert run(["equiv", a, b, "--schema", SCHEMA]) == EXIT_OK
    assert capsys.readouterr().out == "equivalent-up-to-bound\n"
    c = files("c.trc", FIXTURES["union_cell_r"].text)
    assert run(["equiv", a, c, "--schema", SCHEMA]) == EXIT_NEGATIVE
    out = capsys.readouterr().out
    assert out.startswith("not-equivalent\nwitness database:\n")


def test_equiv_needs_schema(files, capsys):
    a = files("a.trc", FIXTURES["division1"].text)
    assert run(["equiv", a, a]) == EXIT_ERROR
    assert "needs --schema" in capsys.readouterr().err


def test_pattern_iso(files, capsys):
    a = files("a.trc", DIVISION_QUERIES["trc2"][1])
    b = files("b.ra", DIVISION_QUERIES["ra"][1])
    assert run(["pattern", "iso", a, b, "--schema", SCHEMA]) == EXIT_OK
    assert "permutation: [0, 2, 1, 3]" in capsys.readouterr().out
    q1, q2 = files("q1.dl", ISO_Q1), files("q2.dl", ISO_Q2)
    assert run(["pattern", "iso", q1, q2, "--schema", "R(A,B)", "--json"]) == EXIT_NEGATIVE
    assert len(json.loads(capsys.readouterr().out)["witnesses"]) == 2


def test_pattern_similar(files, capsys):
    a = files("a.trc", "{q(A) | exists r in R [q.A = r.A]}")
    b = files("b.trc", "{q(C) | exists t in T [q.C = t.C]}")
    assert run(["pattern", "similar", a, b, "--schema1", "R(A)", "--schema2", "T(C)"]) == EXIT_OK
    assert "mapping:" in capsys.readouterr().out


def test_canon(files, capsys):
    path = files("q.trc", "{q(A) | exists r in R [q.A = r.A and exists s in S [s.B = r.B]]}")
    assert run(["canon", path]) == EXIT_OK
    assert capsys.readouterr().out == "{ q(A) | exists r in R, s in S [q.A = r.A and s.B = r.B] }\n"


def test_input_errors(files, capsys):
    assert run(["check", files("q.txt", "x")]) == EXIT_ERROR
    assert "--dialect" in capsys.readouterr().err
    assert run(["check", files("q.trc", "{q(A) |")]) == EXIT_ERROR
    assert run(["check", "/nonexistent/q.trc"]) == EXIT_ERROR
    with pytest.raises(SystemExit) as info:
        run(["translate", "q.trc"])
    assert info.value.code == 2


def test_seed_from_environment(files, capsys, monkeypatch):
    a = files("a.trc", FIXTURES["division1"].text)
    c = files("c.trc", FIXTURES["union_cell_r"].text)
    monkeypatch.setenv("RELDIAG_SEED", "42")
    run(["equiv", a, c, "--schema", SCHEMA, "--json"])
    assert json.loads(capsys.readouterr().out)["bound"]["seed"] == 42
