"""Per-feature change tracking over a rolling window of known-good intervals."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping

import numpy as np

from adf.errors import OrderingError
from adf.snapshot import ClassDictionary, FeatureId, Snapshot, resolve_rows


class ChangeState(IntEnum):
    UNCHANGED = 0
    CHANGED = 1
    ADDED = 2
    REMOVED = 3
    NO_DATA = 4


N_STATES = len(ChangeState)
REAL_STATES = (ChangeState.UNCHANGED, ChangeState.CHANGED, ChangeState.ADDED, ChangeState.REMOVED)


@dataclass(frozen=True)
class ChangeVector:
    """Change state of every observed feature for one interval.

    NoData is never stored; a feature absent from ``states`` is NoData.
    """

    interval_index: int
    states: Mapping[FeatureId, ChangeState] = field(default_factory=dict)

    def state(self, feature: FeatureId) -> ChangeState:
        return self.states.get(feature, ChangeState.NO_DATA)


def _mark_row(states, class_name, key, row, state):
    row_key = row[key]
    for col in row:
        if col != key:
            states.setdefault(FeatureId(class_name, row_key, col), state)


def diff(prev: Snapshot, next: Snapshot, dictionary: ClassDictionary) -> ChangeVector:
    """Classify every feature of two consecutive snapshots.

    Values are compared by canonical string equality, no tolerance.
    """
    if not prev.sequence_number < next.sequence_number:
        raise OrderingError(
            f"diff needs prev < next, got {prev.sequence_number} >= {next.sequence_number}"
        )
    states: dict[FeatureId, ChangeState] = {}
    for name in sorted(set(prev.tables) | set(next.tables)):
        key = dictionary[name]
        old, new = prev.tables.get(name), next.tables.get(name)
        if old is None or new is None:
            table, state = (new, ChangeState.ADDED) if old is None else (old, ChangeState.REMOVED)
            for row in table.rows:
                _mark_row(states, name, key, row, state)
            continue
        matched, added, removed = resolve_rows(old, new, key)
        for a, b in matched:
            row_key = b[key]
            for col in b:
                if col == key:
                    continue
                if col not in a:
                    state = ChangeState.ADDED
                elif a[col] == b[col]:
                    state = ChangeState.UNCHANGED
                else:
                    state = ChangeState.CHANGED
                states[FeatureId(name, row_key, col)] = state
            for col in a:
                if col != key and col not in b:
                    states[FeatureId(name, row_key, col)] = ChangeState.REMOVED
        for row in added:
            _mark_row(states, name, key, row, ChangeState.ADDED)
        for row in removed:
            _mark_row(states, name, key, row, ChangeState.REMOVED)
    return ChangeVector(next.sequence_number, states)


class ChangeWindow:
    """FIFO of change vectors, oldest first, bounded by ``capacity``.

    ``append`` returns a new window; the original is left untouched so the
    detector can hand out windows as immutable views.
    """

    def __init__(self, capacity: int = 30, vectors=()):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.vectors: tuple[ChangeVector, ...] = tuple(vectors)[-capacity:]

    def __len__(self):
        return len(self.vectors)

    def __repr__(self):
        return f"ChangeWindow(capacity={self.capacity}, len={len(self)})"

    @property
    def newest_index(self):
        return self.vectors[-1].interval_index if self.vectors else None

    def append(self, vector: ChangeVector) -> "ChangeWindow":
        if self.vectors and vector.interval_index <= self.newest_index:
            raise OrderingError(
                f"interval {vector.interval_index} is not after {self.newest_index}"
            )
        return ChangeWindow(self.capacity, self.vectors + (vector,))

    def features(self) -> set[FeatureId]:
        out: set[FeatureId] = set()
        for v in self.vectors:
            out.update(v.states)
        return out

    def history(self, feature: FeatureId) -> list[ChangeState]:
        """Unpadded states of ``feature``, oldest first."""
        return [v.state(feature) for v in self.vectors]


@dataclass(frozen=True)
class ChangeSeries:
    feature: FeatureId
    states: tuple[ChangeState, ...]


def pad(states, capacity: int) -> tuple[ChangeState, ...]:
    """Left-pad with NoData (or drop the oldest) to exactly ``capacity`` slots."""
    states = tuple(states)[-capacity:]
    return (ChangeState.NO_DATA,) * (capacity - len(states)) + states


def series_for(window: ChangeWindow, feature: FeatureId) -> ChangeSeries:
    return ChangeSeries(feature, pad(window.history(feature), window.capacity))


def encode_states(states) -> np.ndarray:
    idx = np.fromiter((int(s) for s in states), dtype=np.intp)
    out = np.zeros((idx.size, N_STATES))
    out[np.arange(idx.size), idx] = 1.0
    return out.ravel()


def encode(series: ChangeSeries) -> np.ndarray:
    """One-hot over the five states per slot; length = 5 * len(series)."""
    return encode_states(series.states)


def decode(bits, feature: FeatureId) -> ChangeSeries:
    groups = np.asarray(bits).reshape(-1, N_STATES)
    if not np.all(groups.sum(axis=1) == 1):
        raise ValueError("each slot must have exactly one state bit set")
    return ChangeSeries(feature, tuple(ChangeState(int(i)) for i in groups.argmax(axis=1)))


def vector_to_dict(vector: ChangeVector) -> dict:
    return {
        "interval_index": vector.interval_index,
        "states": [
            [f.class_name, f.row_key, f.property, vector.states[f].name]
            for f in sorted(vector.states)
        ],
    }


def vector_from_dict(data: dict) -> ChangeVector:
    states = {
        FeatureId(c, r, p): ChangeState[name] for c, r, p, name in data["states"]
    }
    return ChangeVector(int(data["interval_index"]), states)
