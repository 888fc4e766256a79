"""Host observations: class tables, typed property values and row identity.

Hosts of the WMI kind expose rows without a primary key, so every monitored
class is paired with a key column in a ``ClassDictionary``; rows are matched
across snapshots by the value of that column.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from adf.errors import SchemaError

VALUE_TYPES = ("integer", "real", "string", "boolean")


@dataclass(frozen=True, order=True)
class FeatureId:
    class_name: str
    row_key: str
    property: str

    def __str__(self):
        return f"{self.class_name}[{self.row_key}].{self.property}"


class ClassDictionary(Mapping[str, str]):
    """Monitored class name -> key column name."""

    def __init__(self, entries: Mapping[str, str]):
        for name, key in entries.items():
            if not name or not key:
                raise SchemaError(f"class dictionary entry {name!r} -> {key!r} is incomplete")
        self._entries = dict(entries)

    def __getitem__(self, name):
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"ClassDictionary({self._entries!r})"


def canonical(value) -> tuple[str, str]:
    """(type tag, canonical string) for a raw property value."""
    if isinstance(value, bool):
        return "boolean", "true" if value else "false"
    if isinstance(value, int):
        return "integer", str(value)
    if isinstance(value, float):
        return "real", repr(value)
    return "string", str(value)


@dataclass(frozen=True)
class Table:
    """Rows of one class. Values are canonical strings; ``types`` tags each column."""

    class_name: str
    columns: tuple[str, ...]
    types: Mapping[str, str]
    rows: tuple[Mapping[str, str], ...] = ()

    @classmethod
    def from_values(cls, class_name: str, records: list[dict]) -> "Table":
        """Build a table from rows of raw Python values (column order from the first row)."""
        columns: list[str] = []
        types: dict[str, str] = {}
        rows = []
        for record in records:
            row = {}
            for col, raw in record.items():
                tag, text = canonical(raw)
                if col not in types:
                    columns.append(col)
                    types[col] = tag
                row[col] = text
            rows.append(row)
        return cls(class_name, tuple(columns), types, tuple(rows))


@dataclass(frozen=True)
class Snapshot:
    sequence_number: int
    timestamp: float
    tables: Mapping[str, Table] = field(default_factory=dict)

    def features(self, dictionary: ClassDictionary) -> Iterator[tuple[FeatureId, str]]:
        """Every (FeatureId, value) pair; the key column itself is identity, not a feature."""
        for name, table in self.tables.items():
            key = dictionary[name]
            for row in table.rows:
                row_key = row[key]
                for col in table.columns:
                    if col != key and col in row:
                        yield FeatureId(name, row_key, col), row[col]

    def feature_count(self, dictionary: ClassDictionary) -> int:
        return sum(1 for _ in self.features(dictionary))


class RowResolution(NamedTuple):
    matched: list  # (prev_row, next_row) pairs
    added: list
    removed: list


def _index_rows(table: Table, key_column: str):
    # a table with no rows carries no columns either, so only a populated one can lack the key
    if table.rows and key_column not in table.columns:
        raise SchemaError(f"key column {key_column!r} missing from class {table.class_name}")
    first: dict[str, Mapping[str, str]] = {}
    extra = []
    for row in table.rows:
        if key_column not in row:
            raise SchemaError(f"row without key {key_column!r} in class {table.class_name}")
        k = row[key_column]
        if k in first:
            extra.append(row)
        else:
            first[k] = row
    return first, extra


def resolve_rows(prev: Table, next: Table, key_column: str) -> RowResolution:
    """Match rows of two tables by key value.

    Within one table the first occurrence of a key wins; later duplicates are
    reported as removed (from ``prev``) or added (in ``next``).
    """
    prev_idx, prev_dupes = _index_rows(prev, key_column)
    next_idx, next_dupes = _index_rows(next, key_column)
    matched = [(prev_idx[k], next_idx[k]) for k in prev_idx if k in next_idx]
    added = [next_idx[k] for k in next_idx if k not in prev_idx] + next_dupes
    removed = [prev_idx[k] for k in prev_idx if k not in next_idx] + prev_dupes
    return RowResolution(matched, added, removed)


class Violation(NamedTuple):
    kind: str  # unknown-class | missing-key-column | missing-key | ragged-row | unknown-type
    class_name: str
    detail: str


def validate_snapshot(snapshot: Snapshot, dictionary: ClassDictionary) -> list[Violation]:
    report = []
    for name, table in snapshot.tables.items():
        if name not in dictionary:
            report.append(Violation("unknown-class", name, "class not in dictionary"))
            continue
        key = dictionary[name]
        if key not in table.columns:
            report.append(Violation("missing-key-column", name, f"no column {key!r}"))
        for col in table.columns:
            if table.types.get(col) not in VALUE_TYPES:
                report.append(Violation("unknown-type", name, f"column {col!r}"))
        cols = set(table.columns)
        for i, row in enumerate(table.rows):
            if key in cols and not row.get(key):
                report.append(Violation("missing-key", name, f"row {i} has no {key!r} value"))
            if set(row) != cols:
                report.append(Violation("ragged-row", name, f"row {i} columns differ from table"))
    return report


# -- structured-text form ---------------------------------------------------

def snapshot_to_dict(snapshot: Snapshot) -> dict:
    return {
        "sequence_number": snapshot.sequence_number,
        "timestamp": snapshot.timestamp,
        "tables": {
            name: {
                "columns": list(t.columns),
                "rows": [[row.get(c) for c in t.columns] for row in t.rows],
            }
            for name, t in snapshot.tables.items()
        },
    }


def schema_to_dict(snapshot: Snapshot, dictionary: ClassDictionary) -> dict:
    return {
        "sequence_number": snapshot.sequence_number,
        "classes": {
            name: {
                "key": dictionary.get(name),
                "columns": [{"name": c, "type": t.types[c]} for c in t.columns],
            }
            for name, t in snapshot.tables.items()
        },
    }


def snapshot_from_dicts(data: dict, schema: dict) -> tuple[Snapshot, ClassDictionary]:
    """Rebuild a snapshot (and its key dictionary) from a data/schema pair."""
    try:
        classes = schema["classes"]
        tables = {}
        for name, body in data["tables"].items():
            columns = tuple(body["columns"])
            types = {c["name"]: c["type"] for c in classes[name]["columns"]}
            rows = tuple(
                {c: v for c, v in zip(columns, values) if v is not None} for values in body["rows"]
            )
            tables[name] = Table(name, columns, types, rows)
        dictionary = ClassDictionary({n: c["key"] for n, c in classes.items()})
        snap = Snapshot(int(data["sequence_number"]), float(data["timestamp"]), tables)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed snapshot document: {exc!r}") from exc
    return snap, dictionary
