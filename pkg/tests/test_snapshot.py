import pytest
from hypothesis import given
from hypothesis import strategies as st

from adf.errors import SchemaError
from adf.snapshot import (
    ClassDictionary,
    FeatureId,
    Snapshot,
    Table,
    canonical,
    resolve_rows,
    schema_to_dict,
    snapshot_from_dicts,
    snapshot_to_dict,
    validate_snapshot,
)


def table(keys, name="Svc", extra="v"):
    return Table.from_values(name, [{"Name": k, extra: i} for i, k in enumerate(keys)])


def keys_of(rows):
    return sorted(r["Name"] for r in rows)


def test_identical_tables_all_match():
    t = table("abc")
    res = resolve_rows(t, t, "Name")
    assert len(res.matched) == 3 and res.added == [] and res.removed == []


def test_missing_key_is_removed():
    res = resolve_rows(table("abc"), table("ac"), "Name")
    assert keys_of(res.removed) == ["b"]
    assert sorted(b["Name"] for _, b in res.matched) == ["a", "c"]


def test_intersection_by_hand():
    res = resolve_rows(table("ab"), table("bc"), "Name")
    assert [b["Name"] for _, b in res.matched] == ["b"]
    assert keys_of(res.added) == ["c"]
    assert keys_of(res.removed) == ["a"]


def test_duplicate_keys_first_occurrence_wins():
    prev = table("ab")
    nxt = Table.from_values("Svc", [{"Name": "a", "v": 1}, {"Name": "a", "v": 2}, {"Name": "b", "v": 3}])
    res = resolve_rows(prev, nxt, "Name")
    assert {b["Name"]: b["v"] for _, b in res.matched} == {"a": "1", "b": "3"}
    assert [r["v"] for r in res.added] == ["2"]


def test_missing_key_column_is_schema_error():
    with pytest.raises(SchemaError):
        resolve_rows(table("ab"), table("ab"), "Id")


@given(st.sets(st.sampled_from("abcdefgh")), st.sets(st.sampled_from("abcdefgh")))
def test_resolution_is_symmetric_and_counts_add_up(p, n):
    prev, nxt = table(sorted(p)), table(sorted(n))
    fwd = resolve_rows(prev, nxt, "Name")
    back = resolve_rows(nxt, prev, "Name")
    assert keys_of(fwd.added) == keys_of(back.removed)
    assert keys_of(fwd.removed) == keys_of(back.added)
    assert sorted(a["Name"] for a, _ in fwd.matched) == sorted(b["Name"] for _, b in back.matched)
    assert len(fwd.matched) + len(fwd.added) == len(nxt.rows)
    assert len(fwd.matched) + len(fwd.removed) == len(prev.rows)


def test_feature_id_order_is_lexicographic():
    ids = [FeatureId("B", "a", "x"), FeatureId("A", "z", "y"), FeatureId("A", "a", "z"), FeatureId("A", "a", "b")]
    assert sorted(ids) == sorted(ids, key=lambda f: (f.class_name, f.row_key, f.property))


def test_canonical_values():
    assert canonical(True) == ("boolean", "true")
    assert canonical(80) == ("integer", "80")
    assert canonical(0.5) == ("real", "0.5")
    assert canonical("Running") == ("string", "Running")


DICT = ClassDictionary({"Svc": "Name"})


def test_valid_snapshot_has_empty_report():
    assert validate_snapshot(Snapshot(1, 0.0, {"Svc": table("ab")}), DICT) == []


def test_unknown_class_is_reported():
    report = validate_snapshot(Snapshot(1, 0.0, {"Svc": table("a"), "Disk": table("c", "Disk")}), DICT)
    assert [v.kind for v in report] == ["unknown-class"]


def test_missing_key_value_is_reported():
    t = Table("Svc", ("Name", "v"), {"Name": "string", "v": "integer"}, ({"Name": "a", "v": "1"}, {"Name": "", "v": "2"}))
    assert [v.kind for v in validate_snapshot(Snapshot(1, 0.0, {"Svc": t}), DICT)] == ["missing-key"]


def test_ragged_row_is_reported():
    t = Table("Svc", ("Name", "v"), {"Name": "string", "v": "integer"}, ({"Name": "a"},))
    assert [v.kind for v in validate_snapshot(Snapshot(1, 0.0, {"Svc": t}), DICT)] == ["ragged-row"]


def test_dictionary_rejects_empty_key():
    with pytest.raises(SchemaError):
        ClassDictionary({"Svc": ""})


def test_features_exclude_key_column():
    snap = Snapshot(1, 0.0, {"Svc": table("ab")})
    assert sorted(f for f, _ in snap.features(DICT)) == [FeatureId("Svc", "a", "v"), FeatureId("Svc", "b", "v")]


def test_structured_text_round_trip():
    snap = Snapshot(7, 123.5, {"Svc": Table.from_values("Svc", [{"Name": "a", "on": True, "n": 3}])})
    back, d = snapshot_from_dicts(snapshot_to_dict(snap), schema_to_dict(snap, DICT))
    assert back == snap and dict(d) == {"Svc": "Name"}


def test_malformed_document_is_schema_error():
    with pytest.raises(SchemaError):
        snapshot_from_dicts({"tables": {}}, {"classes": {}})
