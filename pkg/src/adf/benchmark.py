"""Fault-injection benchmark: trials, metric formulas, sweep and report files."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from adf.detector import DetectionResult, Detector, DetectorConfig, WallClock, WorkClock
from adf.errors import InvalidArgument
from adf.rbm import TrainConfig
from adf.simhost import FaultKind, HostConfig, SimHost, load_preset
from adf.store import SnapshotStore

SAMPLE_SIZES = (5, 10, 15, 20, 25, 30)
REPEATS = 6
FN_WINDOW = 3  # polling intervals allowed for fitness to notice an injected fault

CSV_FIELDS = (
    "fault", "sample_size", "repeat", "tp", "fp", "tn", "fn",
    "fault_position", "lead_count", "elapsed_ticks", "precision", "accuracy",
)
AGGREGATE_FIELDS = (
    "sample_size", "trials", "mean_fault_position", "mean_lead_count",
    "mean_precision", "mean_accuracy", "mean_harmonic_mean", "mean_elapsed_ticks",
)
PLOT_FILES = {
    "time_taken": "mean_elapsed_ticks",
    "fault_position": "mean_fault_position",
    "leads": "mean_lead_count",
    "precision": "mean_precision",
    "accuracy": "mean_accuracy",
    "harmonic_mean": "mean_harmonic_mean",
}
CONTROL = "none"


# -- metrics ----------------------------------------------------------------

def _features(leads):
    return [getattr(x, "feature", x) for x in leads]


def fault_position(leads, ground_truth) -> Optional[int]:
    """0-based index of the first ground-truth feature in the ranked leads, or None."""
    for i, f in enumerate(_features(leads)):
        if f in ground_truth:
            return i
    return None


def _counts(leads, ground_truth):
    feats = _features(leads)
    correct = sum(1 for f in feats if f in ground_truth)
    wrong = len(feats) - correct
    pos = fault_position(feats, ground_truth)
    # with no correct lead every lead sits above where the fault should have been
    above = wrong if pos is None else pos
    return correct, wrong, above


def compute_precision(leads, ground_truth) -> float:
    """C / (C + A): correct leads over correct leads plus leads ranked above the first correct one."""
    feats = _features(leads)
    if not feats:
        return 1.0 if not ground_truth else 0.0
    correct, _, above = _counts(feats, ground_truth)
    return correct / (correct + above) if correct + above else 0.0


def compute_accuracy(leads, ground_truth, false_negatives: int = 0) -> float:
    """(C + W) / (C + W + A + FN)."""
    correct, wrong, above = _counts(leads, ground_truth)
    denom = correct + wrong + above + false_negatives
    if denom == 0:
        return 1.0 if not ground_truth else 0.0
    return (correct + wrong) / denom


def harmonic_mean(precision: float, accuracy: float) -> float:
    if precision < 0 or accuracy < 0:
        raise InvalidArgument("harmonic mean needs non-negative inputs")
    total = precision + accuracy
    return 0.0 if total == 0 else 2.0 * precision * accuracy / total


# -- trials -----------------------------------------------------------------

@dataclass(frozen=True)
class TrialSpec:
    fault: Optional[FaultKind]  # None: no-fault control trial
    sample_size: int
    repeat_index: int = 0
    seed: int = 0

    @property
    def fault_name(self) -> str:
        return CONTROL if self.fault is None else self.fault.value


@dataclass(frozen=True)
class BenchmarkRecord:
    spec: TrialSpec
    true_positive: bool
    false_positive: bool
    true_negative: bool
    false_negative: bool
    fault_position: Optional[int]
    lead_count: int
    elapsed_ticks: int
    precision: float
    accuracy: float
    leads: tuple = ()
    ground_truth: frozenset = frozenset()

    @property
    def harmonic_mean(self) -> float:
        return harmonic_mean(self.precision, self.accuracy)

    def row(self) -> dict:
        return {
            "fault": self.spec.fault_name,
            "sample_size": self.spec.sample_size,
            "repeat": self.spec.repeat_index,
            "tp": int(self.true_positive),
            "fp": int(self.false_positive),
            "tn": int(self.true_negative),
            "fn": int(self.false_negative),
            "fault_position": "absent" if self.fault_position is None else self.fault_position,
            "lead_count": self.lead_count,
            "elapsed_ticks": self.elapsed_ticks,
            "precision": self.precision,
            "accuracy": self.accuracy,
        }


def trial_seed(base_seed: int, fault_name: str, sample_size: int, repeat: int) -> int:
    text = f"{base_seed}|{fault_name}|{sample_size}|{repeat}"
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def run_trial(
    spec: TrialSpec,
    host_config: Optional[HostConfig] = None,
    train: TrainConfig = TrainConfig(),
    window_capacity: int = 30,
    timing: str = "work",
    store_root=None,
) -> BenchmarkRecord:
    """One injected-fault (or control) trial on a fresh host and detector.

    The detector first learns until its window holds ``sample_size`` change
    vectors; the fault is then injected and the host polled for up to
    ``FN_WINDOW`` intervals.
    """
    if spec.sample_size > window_capacity:
        raise InvalidArgument(f"sample size {spec.sample_size} exceeds window {window_capacity}")
    host_config = host_config or load_preset("desk")
    host = SimHost(host_config, seed=spec.seed)
    cfg = DetectorConfig(window_capacity=window_capacity, rbm_train=train, base_seed=spec.seed)
    clock = WorkClock() if timing == "work" else WallClock()

    with tempfile.TemporaryDirectory(prefix="adf-trial-") as tmp:
        store = SnapshotStore(store_root if store_root is not None else tmp)
        det = Detector(cfg, store=store, clock=clock)
        for _ in range(4 * spec.sample_size + 10):
            if len(det.window) >= spec.sample_size:
                break
            det.poll_once(host)
        else:
            raise RuntimeError(f"host never produced {spec.sample_size} known-good intervals")

        truth = frozenset()
        if spec.fault is not None:
            truth = host.inject(spec.fault).ground_truth
        result: Optional[DetectionResult] = None
        for _ in range(FN_WINDOW):
            outcome = det.poll_once(host)
            if isinstance(outcome, DetectionResult):
                result = outcome
                break

    present = spec.fault is not None
    detected = result is not None
    leads = result.leads if result else ()
    fn = present and not detected
    return BenchmarkRecord(
        spec=spec,
        true_positive=present and detected,
        false_positive=detected and not present,
        true_negative=not present and not detected,
        false_negative=fn,
        fault_position=fault_position(leads, truth),
        lead_count=len(leads),
        elapsed_ticks=result.elapsed_ticks if result else 0,
        precision=compute_precision(leads, truth),
        accuracy=compute_accuracy(leads, truth, int(fn)),
        leads=tuple(leads),
        ground_truth=truth,
    )


# -- sweep ------------------------------------------------------------------

def _mean(values):
    values = list(values)
    return math.fsum(values) / len(values) if values else float("nan")


def aggregate(rows: Iterable[dict]) -> list[dict]:
    """Per-sample-size means of the CSV rows; independent of row order."""
    groups: dict[int, list[dict]] = {}
    for r in rows:
        groups.setdefault(int(r["sample_size"]), []).append(r)
    out = []
    for size in sorted(groups):
        g = groups[size]
        positions = [int(r["fault_position"]) for r in g if str(r["fault_position"]) != "absent"]
        out.append({
            "sample_size": size,
            "trials": len(g),
            "mean_fault_position": _mean(positions),
            "mean_lead_count": _mean(int(r["lead_count"]) for r in g),
            "mean_precision": _mean(float(r["precision"]) for r in g),
            "mean_accuracy": _mean(float(r["accuracy"]) for r in g),
            "mean_harmonic_mean": _mean(
                harmonic_mean(float(r["precision"]), float(r["accuracy"])) for r in g
            ),
            "mean_elapsed_ticks": _mean(int(r["elapsed_ticks"]) for r in g),
        })
    return out


@dataclass
class SweepResult:
    records: list[BenchmarkRecord]
    aggregates: list[dict]


def sweep_specs(faults, sample_sizes, repeats, base_seed) -> list[TrialSpec]:
    specs = []
    for fault in faults:
        name = CONTROL if fault is None else fault.value
        for size in sample_sizes:
            for rep in range(repeats):
                specs.append(TrialSpec(fault, size, rep, trial_seed(base_seed, name, size, rep)))
    return specs


def run_sweep(
    faults: Sequence[Optional[FaultKind]] = tuple(FaultKind),
    sample_sizes: Sequence[int] = SAMPLE_SIZES,
    repeats: int = REPEATS,
    base_seed: int = 0,
    host_config: Optional[HostConfig] = None,
    train: TrainConfig = TrainConfig(),
    window_capacity: int = 30,
    timing: str = "work",
    out_dir=None,
    progress=None,
) -> SweepResult:
    host_config = host_config or load_preset("desk")
    records = []
    for spec in sweep_specs(faults, sample_sizes, repeats, base_seed):
        rec = run_trial(spec, host_config, train, window_capacity, timing)
        records.append(rec)
        if progress is not None:
            progress(rec)
    result = SweepResult(records, aggregate(r.row() for r in records))
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


# -- files ------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6f}"
    return str(value)


def records_csv(records: Iterable[BenchmarkRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        row = rec.row()
        w.writerow([_fmt(row[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def aggregates_csv(aggregates: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_FIELDS)
    for a in aggregates:
        w.writerow([_fmt(a[f]) for f in AGGREGATE_FIELDS])
    return buf.getvalue()


def write_outputs(result: SweepResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "trials.csv"
    path.write_text(records_csv(result.records))
    written.append(path)
    path = out / "aggregate.csv"
    path.write_text(aggregates_csv(result.aggregates))
    written.append(path)
    for name, column in PLOT_FILES.items():
        path = out / f"plot_{name}.dat"
        lines = [f"# sample_size {column}"]
        lines += [f"{a['sample_size']} {_fmt(a[column])}" for a in result.aggregates]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


class CsvFormatError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_trials_csv(text: str) -> list[dict]:
    """Parse and validate a trials CSV; raises CsvFormatError naming the bad line."""
    rows = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return rows
    if tuple(header) != CSV_FIELDS:
        raise CsvFormatError(f"unexpected header {header}", 1)
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != len(CSV_FIELDS):
            raise CsvFormatError(f"expected {len(CSV_FIELDS)} fields, got {len(record)}", line)
        row = dict(zip(CSV_FIELDS, record))
        try:
            for f in ("sample_size", "repeat", "tp", "fp", "tn", "fn", "lead_count", "elapsed_ticks"):
                row[f] = int(row[f])
            for f in ("precision", "accuracy"):
                row[f] = float(row[f])
            if row["fault_position"] != "absent":
                row["fault_position"] = int(row["fault_position"])
        except ValueError as exc:
            raise CsvFormatError(str(exc), line) from None
        rows.append(row)
    return rows


def format_table(aggregates: Sequence[dict]) -> str:
    headers = ("samples", "trials", "fault_pos", "leads", "precision", "accuracy", "harmonic", "ticks")
    lines = ["  ".join(f"{h:>10}" for h in headers)]
    for a in aggregates:
        vals = [a[f] for f in AGGREGATE_FIELDS]
        lines.append("  ".join(f"{_fmt(v):>10}" for v in vals))
    return "\n".join(lines)


def with_epochs(train: TrainConfig, epochs: Optional[int]) -> TrainConfig:
    return train if epochs is None else replace(train, epochs=epochs)
