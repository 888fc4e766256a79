"""On-disk known-good store.

Layout under the store root::

    snapshots/<seq>.json         property values
    schema/<seq>.schema.json     classes, key columns, column types
    changes/<seq>.json           change vector ending at <seq>
    leads/<seq>.ndjson           leads report for a failed interval

Every file is written to a temporary name and renamed into place, so
readers never observe a partial file.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Optional

from adf.changes import ChangeVector, vector_from_dict, vector_to_dict
from adf.errors import PersistenceError, SchemaError
from adf.snapshot import (
    ClassDictionary,
    Snapshot,
    schema_to_dict,
    snapshot_from_dicts,
    snapshot_to_dict,
)


def _atomic_write(path: Path, text: str, seq=None):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}", seq) from exc


def _read_json(path: Path, seq):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise PersistenceError(f"missing store file {path} (sequence {seq})", seq) from exc
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise PersistenceError(f"corrupt store file {path} (sequence {seq}): {exc}", seq) from exc


class SnapshotStore:
    def __init__(self, root):
        self.root = Path(root)

    def _snapshot_path(self, seq: int) -> Path:
        return self.root / "snapshots" / f"{seq}.json"

    def _schema_path(self, seq: int) -> Path:
        return self.root / "schema" / f"{seq}.schema.json"

    def write(self, snapshot: Snapshot, dictionary: ClassDictionary) -> None:
        seq = snapshot.sequence_number
        _atomic_write(self._schema_path(seq), json.dumps(schema_to_dict(snapshot, dictionary)), seq)
        _atomic_write(self._snapshot_path(seq), json.dumps(snapshot_to_dict(snapshot)), seq)

    def write_changes(self, vector: ChangeVector) -> None:
        seq = vector.interval_index
        _atomic_write(self.root / "changes" / f"{seq}.json", json.dumps(vector_to_dict(vector)), seq)

    def write_leads(self, seq: int, lines: list[dict]) -> Path:
        path = self.root / "leads" / f"{seq}.ndjson"
        _atomic_write(path, "".join(json.dumps(line) + "\n" for line in lines), seq)
        return path

    @staticmethod
    def _sequences(directory: Path, suffix: str) -> list[int]:
        if not directory.is_dir():
            return []
        out = []
        for p in directory.iterdir():
            name = p.name
            if name.endswith(suffix) and not name.startswith("."):
                stem = name[: -len(suffix)]
                if stem.isdigit():
                    out.append(int(stem))
        return sorted(out)

    def sequences(self) -> list[int]:
        return self._sequences(self.root / "snapshots", ".json")

    def load(self, first: Optional[int] = None, last: Optional[int] = None) -> list[Snapshot]:
        """Snapshots with first <= seq <= last (bounds optional), in sequence order."""
        return [snap for snap, _ in self.load_with_schema(first, last)]

    def load_with_schema(self, first=None, last=None) -> list[tuple[Snapshot, ClassDictionary]]:
        out = []
        for seq in self.sequences():
            if (first is not None and seq < first) or (last is not None and seq > last):
                continue
            data = _read_json(self._snapshot_path(seq), seq)
            schema = _read_json(self._schema_path(seq), seq)
            try:
                out.append(snapshot_from_dicts(data, schema))
            except SchemaError as exc:
                raise PersistenceError(f"corrupt snapshot (sequence {seq}): {exc}", seq) from exc
        return out

    def load_changes(self) -> list[ChangeVector]:
        out = []
        for seq in self._sequences(self.root / "changes", ".json"):
            data = _read_json(self.root / "changes" / f"{seq}.json", seq)
            try:
                out.append(vector_from_dict(data))
            except (KeyError, TypeError, ValueError) as exc:
                raise PersistenceError(f"corrupt change vector (sequence {seq}): {exc}", seq) from exc
        return out

    def leads_reports(self) -> list[Path]:
        return [self.root / "leads" / f"{s}.ndjson" for s in self._sequences(self.root / "leads", ".ndjson")]
