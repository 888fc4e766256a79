"""Polling loop, lazy candidate selection and RBM-ranked root-cause leads.

While every fitness test passes, each interval's change vector joins the
known-good (LKG) window and is persisted. When a test fails, the faulty
interval is diffed against the last known-good snapshot; only features whose
faulty behaviour has no precedent in their LKG history are evaluated, each
by a freshly trained class-augmented RBM.
"""
from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from adf import rbm as R
from adf.changes import (
    REAL_STATES,
    ChangeState,
    ChangeVector,
    ChangeWindow,
    diff,
    encode_states,
    pad,
)
from adf.errors import InsufficientHistory, InvalidArgument, PersistenceError
from adf.fitness import FitnessReport, FitnessTest, default_suite, run_all
from adf.snapshot import FeatureId, Snapshot
from adf.store import SnapshotStore

log = logging.getLogger(__name__)

TICK_NS = 100


@dataclass(frozen=True)
class DetectorConfig:
    polling_interval: float = 60.0
    window_capacity: int = 30
    rbm_train: R.TrainConfig = field(default_factory=R.TrainConfig)
    base_seed: int = 0
    store_path: Optional[str] = None
    n_hidden: Optional[int] = None  # None: max(8, ceil(n_visible / 4))
    workers: int = 1

    def __post_init__(self):
        if not self.polling_interval > 0:
            raise InvalidArgument(f"polling_interval must be > 0, got {self.polling_interval}")
        if self.window_capacity < 2:
            raise InvalidArgument(f"window_capacity must be >= 2, got {self.window_capacity}")
        if self.workers < 1:
            raise InvalidArgument(f"workers must be >= 1, got {self.workers}")


class WallClock:
    """Real elapsed time in 100 ns ticks."""

    def now(self) -> int:
        return time.perf_counter_ns() // TICK_NS

    def charge(self, units: int) -> None:
        pass


class WorkClock:
    """Deterministic clock advanced by the work the detector reports.

    One tick per 1000 multiply-accumulates of RBM training, plus one per
    feature scanned; used where byte-reproducible output matters.
    """

    def __init__(self):
        self.ticks = 0

    def now(self) -> int:
        return self.ticks

    def charge(self, units: int) -> None:
        self.ticks += int(units)


@dataclass(frozen=True)
class Lead:
    feature: FeatureId
    confidence: float
    rank: int


@dataclass(frozen=True)
class DetectionResult:
    leads: tuple[Lead, ...]
    elapsed_ticks: int
    candidate_count: int
    triggering_report: Optional[FitnessReport] = None
    skipped: tuple[tuple[FeatureId, str], ...] = ()
    sequence_number: Optional[int] = None

    def report_lines(self) -> list[dict]:
        lines = [
            {
                "rank": lead.rank,
                "class_name": lead.feature.class_name,
                "row_key": lead.feature.row_key,
                "property": lead.feature.property,
                "confidence": lead.confidence,
            }
            for lead in self.leads
        ]
        lines.append({"elapsed_ticks": self.elapsed_ticks, "candidate_count": self.candidate_count})
        return lines


@dataclass(frozen=True)
class LearnedOutcome:
    sequence_number: int
    vector: Optional[ChangeVector]
    window_length: int
    persisted: bool = True


def feature_seed(base_seed: int, feature: FeatureId) -> int:
    text = "\x1f".join((str(base_seed), feature.class_name, feature.row_key, feature.property))
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def select_candidates(window: ChangeWindow, faulty: ChangeVector) -> list[FeatureId]:
    """Features whose faulty-interval behaviour has no precedent in the LKG window.

    A feature is a candidate when its faulty state is not Unchanged and that
    exact state never occurs in its LKG history. Anything that behaved the same
    way while the host was healthy is left out.
    """
    if len(window) == 0:
        raise InsufficientHistory("the known-good window is empty")
    out = []
    for f, state in faulty.states.items():
        if state in (ChangeState.UNCHANGED, ChangeState.NO_DATA):
            continue
        if state in window.history(f):
            continue
        out.append(f)
    return sorted(out)


def training_set(history: Sequence[ChangeState], faulty_state: ChangeState, capacity: int):
    """Class-augmented training rows and the faulty query series for one feature.

    Expected rows are the padded series as it stood at each LKG interval.
    Unexpected rows take the newest LKG series and swap its newest slot for
    each real state the feature never showed. The query is the series as it
    stands after the faulty interval (oldest slot shifted out).
    """
    history = list(history)
    n = len(history)
    seen = set(history)
    unseen = [s for s in REAL_STATES if s not in seen]
    width = capacity * len(ChangeState)
    rows = np.zeros((n + len(unseen), width + 2))
    for t in range(1, n + 1):
        rows[t - 1, :width] = encode_states(pad(history[:t], capacity))
        rows[t - 1, width] = 1.0
    for i, s in enumerate(unseen):
        rows[n + i, :width] = encode_states(pad(history[:-1] + [s], capacity))
        rows[n + i, width + 1] = 1.0
    query = encode_states(pad(history + [faulty_state], capacity))
    return rows, query


def score_feature(feature, history, faulty_state, cfg: DetectorConfig):
    """Train a fresh RBM on one feature's LKG behaviour; returns (expected, unexpected, n_rows)."""
    rows, query = training_set(history, faulty_state, cfg.window_capacity)
    n_visible = rows.shape[1]
    n_hidden = cfg.n_hidden or R.default_hidden_units(n_visible)
    model = R.new_rbm(n_visible, n_hidden, feature_seed(cfg.base_seed, feature))
    model, _ = R.train(model, rows, cfg.rbm_train)
    expected, unexpected = R.classify(model, query)
    return expected, unexpected, rows.shape


def rank_leads(scored: Sequence[tuple[FeatureId, float]]) -> tuple[Lead, ...]:
    """Sort by confidence descending, ties by FeatureId, and number ranks from 0."""
    ordered = sorted(scored, key=lambda fc: (-fc[1], fc[0]))
    return tuple(Lead(f, c, i) for i, (f, c) in enumerate(ordered))


def detect_leads(
    window: ChangeWindow,
    faulty: ChangeVector,
    cfg: DetectorConfig,
    report: Optional[FitnessReport] = None,
    clock=None,
) -> DetectionResult:
    clock = clock or WallClock()
    start = clock.now()
    candidates = select_candidates(window, faulty)
    clock.charge(len(faulty.states) + 1)

    def job(f):
        try:
            return f, score_feature(f, window.history(f), faulty.state(f), cfg), None
        except Exception as exc:  # one bad feature must not sink the detection
            return f, None, f"{type(exc).__name__}: {exc}"

    if cfg.workers > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(job, candidates))
    else:
        outcomes = [job(f) for f in candidates]

    scored, skipped = [], []
    for f, res, err in outcomes:
        if err is not None:
            log.warning("skipping %s: %s", f, err)
            skipped.append((f, err))
            continue
        expected, unexpected, (n_rows, n_visible) = res
        n_hidden = cfg.n_hidden or R.default_hidden_units(n_visible)
        clock.charge(cfg.rbm_train.epochs * n_rows * n_visible * n_hidden * 6 // 1000)
        if unexpected > expected:
            scored.append((f, unexpected))
    leads = rank_leads(scored)
    elapsed = max(1, clock.now() - start)
    return DetectionResult(leads, elapsed, len(candidates), report, tuple(skipped), faulty.interval_index)


class Detector:
    """Holds the LKG window and last known-good snapshot across polls."""

    def __init__(
        self,
        cfg: DetectorConfig = DetectorConfig(),
        suite: Optional[list[FitnessTest]] = None,
        store: Optional[SnapshotStore] = None,
        clock=None,
    ):
        self.cfg = cfg
        self.suite = suite if suite is not None else default_suite()
        if store is None and cfg.store_path is not None:
            store = SnapshotStore(cfg.store_path)
        self.store = store
        self.clock = clock or WallClock()
        self.window = ChangeWindow(cfg.window_capacity)
        self.last_good: Optional[Snapshot] = None

    def poll_once(self, host) -> Union[LearnedOutcome, DetectionResult]:
        snap = host.sample()
        report = run_all(self.suite, host)
        dictionary = host.dictionary
        if not report.overall_valid:
            return self._on_fault(snap, dictionary, report)

        vector = diff(self.last_good, snap, dictionary) if self.last_good is not None else None
        persisted = True
        if self.store is not None:
            try:
                self.store.write(snap, dictionary)
                if vector is not None:
                    self.store.write_changes(vector)
            except PersistenceError as exc:
                log.error("interval %d not learned: %s", snap.sequence_number, exc)
                persisted = False
        if vector is not None and persisted:
            self.window = self.window.append(vector)
        self.last_good = snap
        return LearnedOutcome(snap.sequence_number, vector if persisted else None, len(self.window), persisted)

    def _on_fault(self, snap, dictionary, report) -> DetectionResult:
        if self.last_good is None or len(self.window) == 0:
            log.warning("fault at interval %d with no known-good history", snap.sequence_number)
            return DetectionResult((), 1, 0, report, (), snap.sequence_number)
        faulty = diff(self.last_good, snap, dictionary)
        result = detect_leads(self.window, faulty, self.cfg, report, self.clock)
        if self.store is not None:
            try:
                self.store.write_leads(snap.sequence_number, result.report_lines())
            except PersistenceError as exc:
                log.error("leads report for interval %d lost: %s", snap.sequence_number, exc)
        return result
