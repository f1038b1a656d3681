import pytest
from hypothesis import given, strategies as st

from reldiag.catalog import Database, Schema, active_domain, load_database, save_database
from reldiag.errors import SchemaError, SortError

SCHEMA = Schema.parse("Sailor(sid, sname:str); Boat(bid:int, color:str)")


def test_schema_parse_defaults_to_int():
    s = Schema.parse("R(A, B:str); S(B)")
    assert s.names == ("R", "S")
    assert s.relation("R").sorts == ("int", "str")
    assert s.relation("S").attribute_names == ("B",)
    assert str(s) == "R(A:int, B:str); S(B:int)"


def test_schema_rejects_duplicates_and_unknown_sorts():
    with pytest.raises(SchemaError):
        Schema.parse("R(A); R(B)")
    with pytest.raises(SchemaError):
        Schema.parse("R(A, A)")
    with pytest.raises(SchemaError):
        Schema.parse("R(A:float)")
    with pytest.raises(SchemaError):
        Schema.parse("R(A)").relation("S")


def test_restrict_and_extend():
    s = Schema.parse("R(A,B); S(B); T(C)")
    assert s.restrict(["T", "R"]).names == ("R", "T")
    ext = s.extended([s.relation("R").renamed("R1")])
    assert ext.relation("R1").attribute_names == ("A", "B")


def test_database_checks_rows():
    with pytest.raises(SchemaError):
        Database.of(SCHEMA, {"Sailor": [(1,)]})
    with pytest.raises(SortError):
        Database.of(SCHEMA, {"Sailor": [("x", "y")]})
    with pytest.raises(SchemaError):
        Database.of(SCHEMA, {"Nope": [(1,)]})
    db = Database.of(SCHEMA, {"Sailor": [(1, "ann")]})
    assert db["Boat"] == frozenset()
    assert db.size() == 1


def test_load_database_text():
    db = load_database(
        """
        relation R(A:int, B:str)   # header
        R(1, "red")
        R(2, "blue")
        R(1, "red")
        """
    )
    assert db["R"] == {(1, "red"), (2, "blue")}
    assert active_domain(db, "str") == {"red", "blue"}
    assert active_domain(db) == {1, 2, "red", "blue"}


@pytest.mark.parametrize(
    "text",
    [
        "relation R(A)\nR(null)",
        "relation R(A)\nR(1,)",
        "R(1)",
        "relation R(A)\nR(1, 2)",
        "relation R(A:int)\nrelation R(A:str)",
        "relation R(A)\nR(1) $",
    ],
)
def test_load_database_errors(text):
    with pytest.raises(SchemaError):
        load_database(text)


def test_load_with_given_schema():
    db = load_database('Sailor(3, "bo")', SCHEMA)
    assert db["Sailor"] == {(3, "bo")}


rows = st.lists(st.tuples(st.integers(-5, 5), st.text("ab\"\\ é", max_size=4)), max_size=6)


@given(rows, rows)
def test_save_load_round_trip(sailors, boats):
    db = Database.of(SCHEMA, {"Sailor": sailors, "Boat": boats})
    text = save_database(db)
    again = load_database(text)
    assert again == db
    assert save_database(again) == text
