import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adf.changes import (
    ChangeSeries,
    ChangeState as S,
    ChangeVector,
    ChangeWindow,
    decode,
    diff,
    encode,
    pad,
    series_for,
    vector_from_dict,
    vector_to_dict,
)
from adf.errors import OrderingError
from adf.snapshot import ClassDictionary, FeatureId, Snapshot, Table

DICT = ClassDictionary({"Svc": "Name", "Disk": "Id"})
F = FeatureId("Svc", "web", "Port")


def snap(seq, services, disks=()):
    tables = {"Svc": Table.from_values("Svc", services)}
    if disks:
        tables["Disk"] = Table.from_values("Disk", list(disks))
    return Snapshot(seq, float(seq), tables)


BASE = [{"Name": "web", "Port": 80, "State": "Running"}, {"Name": "dns", "Port": 53, "State": "Running"}]
DISK = {"Id": "E:", "Size": 10, "Free": 4, "Label": "www", "Fs": "NTFS", "Serial": "x1"}


def test_identical_snapshots_are_unchanged():
    v = diff(snap(1, BASE, [DISK]), snap(2, BASE, [DISK]), DICT)
    assert v.interval_index == 2
    assert len(v.states) == 9 and set(v.states.values()) == {S.UNCHANGED}


def test_single_value_change():
    changed = [dict(BASE[0], Port=0), BASE[1]]
    v = diff(snap(1, BASE), snap(2, changed), DICT)
    assert v.states[F] is S.CHANGED
    assert [f for f, s in v.states.items() if s is not S.UNCHANGED] == [F]


def test_deleted_row_marks_every_property_removed():
    v = diff(snap(1, BASE, [DISK]), snap(2, BASE), DICT)
    removed = [f for f, s in v.states.items() if s is S.REMOVED]
    assert len(removed) == 5 and all(f.class_name == "Disk" for f in removed)


def test_new_row_and_new_column_are_added():
    grown = [dict(BASE[0], Extra=1), BASE[1], {"Name": "ftp", "Port": 21, "State": "Stopped"}]
    v = diff(snap(1, BASE), snap(2, grown), DICT)
    assert v.states[FeatureId("Svc", "web", "Extra")] is S.ADDED
    assert v.states[FeatureId("Svc", "ftp", "Port")] is S.ADDED


def test_diff_requires_increasing_sequence():
    with pytest.raises(OrderingError):
        diff(snap(2, BASE), snap(2, BASE), DICT)


def test_absent_feature_reads_as_no_data():
    assert ChangeVector(1).state(F) is S.NO_DATA


def vec(i, state=S.CHANGED):
    return ChangeVector(i, {F: state})


def test_append_to_empty_window():
    assert len(ChangeWindow(30).append(vec(1))) == 1


def test_full_window_evicts_oldest():
    w = ChangeWindow(30)
    for i in range(1, 31):
        w = w.append(vec(i))
    w2 = w.append(vec(31))
    assert len(w2) == 30
    assert w2.vectors[0].interval_index == 2 and w2.newest_index == 31
    assert len(w) == 30 and w.vectors[0].interval_index == 1  # original untouched


def test_stale_index_is_rejected():
    with pytest.raises(OrderingError):
        ChangeWindow(5).append(vec(3)).append(vec(3))


@given(st.integers(1, 12), st.lists(st.integers(1, 3), max_size=40))
def test_window_is_bounded_fifo(capacity, steps):
    w, i, seen = ChangeWindow(capacity), 0, []
    for step in steps:
        i += step
        w = w.append(vec(i))
        seen.append(i)
        assert len(w) <= capacity
        assert [v.interval_index for v in w.vectors] == seen[-capacity:]


def test_series_pads_oldest_end():
    w = ChangeWindow(30)
    for i in range(1, 6):
        w = w.append(vec(i))
    s = series_for(w, F)
    assert s.states == (S.NO_DATA,) * 25 + (S.CHANGED,) * 5


def test_series_for_unknown_feature_is_all_no_data():
    w = ChangeWindow(30).append(vec(1))
    assert series_for(w, FeatureId("X", "y", "z")).states == (S.NO_DATA,) * 30


def test_series_for_always_changed_feature():
    w = ChangeWindow(30)
    for i in range(1, 31):
        w = w.append(vec(i))
    assert series_for(w, F).states == (S.CHANGED,) * 30


@given(st.integers(1, 30), st.integers(0, 45))
def test_series_length_is_capacity(capacity, fill):
    w = ChangeWindow(capacity)
    for i in range(1, fill + 1):
        w = w.append(vec(i))
    assert len(series_for(w, F).states) == capacity


def test_pad_truncates_to_newest():
    assert pad([S.ADDED, S.CHANGED, S.REMOVED], 2) == (S.CHANGED, S.REMOVED)


def test_encode_is_one_hot_per_slot():
    bits = encode(ChangeSeries(F, (S.UNCHANGED,) * 30))
    assert bits.shape == (150,) and bits.sum() == 30


def test_encode_no_data_series():
    groups = encode(ChangeSeries(F, (S.NO_DATA,) * 30)).reshape(30, 5)
    assert np.all(groups[:, S.NO_DATA] == 1) and groups.sum() == 30


states = st.sampled_from(list(S))


@given(st.lists(states, min_size=1, max_size=40))
def test_decode_inverts_encode(seq):
    s = ChangeSeries(F, tuple(seq))
    assert decode(encode(s), F) == s


@given(st.lists(states, min_size=1, max_size=10), st.lists(states, min_size=1, max_size=10))
def test_encode_is_injective(a, b):
    if len(a) == len(b) and a != b:
        assert not np.array_equal(encode(ChangeSeries(F, tuple(a))), encode(ChangeSeries(F, tuple(b))))


def test_decode_rejects_invalid_groups():
    with pytest.raises(ValueError):
        decode(np.zeros(10), F)


def test_vector_round_trip():
    v = ChangeVector(9, {F: S.CHANGED, FeatureId("Disk", "E:", "Free"): S.REMOVED})
    assert vector_from_dict(vector_to_dict(v)) == v
