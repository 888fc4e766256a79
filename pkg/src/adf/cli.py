"""Command-line entry point.

Exit codes: 0 success, 1 self-check failure, 2 usage or configuration error.
Environment overrides: ADF_STORE (store path), ADF_SEED (seed).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from adf import benchmark as B
from adf.detector import DetectionResult, Detector, DetectorConfig
from adf.errors import ConfigError, ProtocolError
from adf.rbm import TrainConfig
from adf.rbm.selfcheck import run_oracle_suite
from adf.simhost import PRESETS, FaultKind, SimHost, load_config, load_preset

log = logging.getLogger("adf")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- control file -----------------------------------------------------------

def read_control(path: Path):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        return None
    except (OSError, json.JSONDecodeError) as exc:
        log.warning("unreadable control file %s: %s", path, exc)
        return None


def write_control(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc))
    os.replace(tmp, path)


def apply_control(path: Path, host: SimHost) -> None:
    """Carry out a pending command left by ``adf inject``."""
    doc = read_control(path)
    if not doc or doc.get("status") != "pending":
        return
    if doc.get("command") == "clear":
        host.clear_faults()
        doc["status"] = "done"
        log.info("faults cleared")
    else:
        try:
            rec = host.inject(FaultKind.parse(doc["fault"]))
            doc["status"] = "active"
            doc["injected_at"] = rec.injected_at
            log.info("injected %s at interval %d", rec.kind.value, rec.injected_at)
        except (ProtocolError, ValueError, KeyError) as exc:
            doc["status"] = "rejected"
            doc["reason"] = str(exc)
            log.warning("injection rejected: %s", exc)
    write_control(path, doc)


# -- commands ---------------------------------------------------------------

def _train_config(args) -> TrainConfig:
    return TrainConfig(epochs=args.epochs)


def cmd_monitor(args) -> int:
    if args.host_config is not None:
        config = load_config(args.host_config)
    else:
        config = load_preset(args.preset)
    if args.interval < 0:
        raise UsageError("--interval must be >= 0")
    store_path = Path(args.store)
    control = Path(args.control) if args.control else store_path / "control.json"
    # --interval 0 polls back to back; the simulated clock still steps 60 s
    interval = args.interval or 60.0
    try:
        cfg = DetectorConfig(
            polling_interval=interval,
            window_capacity=args.window,
            rbm_train=_train_config(args),
            base_seed=args.seed,
            store_path=str(store_path),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    host = SimHost(config, seed=args.seed, interval=interval)
    det = Detector(cfg)
    polls = 0
    try:
        while args.max_polls == 0 or polls < args.max_polls:
            apply_control(control, host)
            outcome = det.poll_once(host)
            polls += 1
            if isinstance(outcome, DetectionResult):
                top = outcome.leads[0] if outcome.leads else None
                print(
                    f"interval {outcome.sequence_number}: INVALID "
                    f"({', '.join(outcome.triggering_report.failed)}); "
                    f"{len(outcome.leads)} leads"
                    + (f", top {top.feature} ({top.confidence:.3f})" if top else ""),
                    flush=True,
                )
            else:
                print(f"interval {outcome.sequence_number}: valid, window {outcome.window_length}", flush=True)
            if args.interval > 0 and (args.max_polls == 0 or polls < args.max_polls):
                time.sleep(args.interval)
    except KeyboardInterrupt:
        log.info("interrupted after %d polls", polls)
    return EXIT_OK


def cmd_inject(args) -> int:
    control = Path(args.control)
    if args.clear:
        write_control(control, {"command": "clear", "status": "pending"})
        return EXIT_OK
    if args.fault is None:
        raise UsageError("inject needs --fault NAME or --clear")
    try:
        kind = FaultKind.parse(args.fault)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = read_control(control)
    if doc and doc.get("command") == "inject" and doc.get("status") in ("pending", "active"):
        raise UsageError(
            f"protocol error: fault {doc.get('fault')} is already {doc['status']}; "
            "clear it first (inject --clear)"
        )
    write_control(control, {"command": "inject", "fault": kind.value, "status": "pending"})
    return EXIT_OK


def _parse_faults(text: str):
    if text == "all":
        return list(FaultKind)
    out = []
    for name in text.split(","):
        if name.strip() in (B.CONTROL, "control"):
            out.append(None)
        else:
            out.append(FaultKind.parse(name))
    return out


def cmd_bench(args) -> int:
    try:
        samples = [int(s) for s in args.samples.split(",") if s.strip()]
        faults = _parse_faults(args.faults)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bad = [s for s in samples if not 1 <= s <= args.window]
    if bad:
        raise UsageError(f"sample sizes {bad} exceed the window capacity {args.window}")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from None
    result = B.run_sweep(
        faults=faults,
        sample_sizes=samples,
        repeats=args.repeats,
        base_seed=args.seed,
        host_config=load_preset(args.preset),
        train=_train_config(args),
        window_capacity=args.window,
        timing=args.timing,
        out_dir=out,
    )
    print(B.format_table(result.aggregates))
    print(f"{len(result.records)} trials written to {out / 'trials.csv'}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    try:
        rows = B.read_trials_csv(text)
    except B.CsvFormatError as exc:
        raise UsageError(f"malformed CSV {args.input}: {exc}") from None
    aggregates = B.aggregate(rows)
    if args.format == "csv":
        sys.stdout.write(B.aggregates_csv(aggregates))
    else:
        print(B.format_table(aggregates))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    results = run_oracle_suite(seed=args.seed, corrupt=args.corrupt)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:28s} deviation={r.deviation:.3e}  tolerance={r.tolerance:.0e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("ADF_SEED", "0")  # string default: argparse applies type=int
    env_store = os.environ.get("ADF_STORE", "adf-store")

    p = argparse.ArgumentParser(prog="adf", description="RBM-based fault detection on a simulated host")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("monitor", help="run the polling loop")
    m.add_argument("--interval", type=float, default=60.0, help="seconds between polls (0: no sleep)")
    m.add_argument("--window", type=int, default=30)
    m.add_argument("--host-config", help="host configuration JSON (default: --preset)")
    m.add_argument("--preset", choices=PRESETS, default="desk")
    m.add_argument("--store", default=env_store)
    m.add_argument("--seed", type=int, default=env_seed)
    m.add_argument("--control", help="control file polled for injections (default: <store>/control.json)")
    m.add_argument("--max-polls", type=int, default=0, help="stop after N polls (0: run until interrupted)")
    m.add_argument("--epochs", type=int, default=5000)
    m.set_defaults(func=cmd_monitor)

    i = sub.add_parser("inject", help="ask a running monitor to inject a fault")
    i.add_argument("--fault", help=", ".join(k.value for k in FaultKind))
    i.add_argument("--clear", action="store_true", help="clear the active fault instead")
    i.add_argument("--control", default=str(Path(env_store) / "control.json"))
    i.set_defaults(func=cmd_inject)

    b = sub.add_parser("bench", help="run the fault-injection sweep")
    b.add_argument("--samples", default=",".join(map(str, B.SAMPLE_SIZES)))
    b.add_argument("--repeats", type=int, default=B.REPEATS)
    b.add_argument("--faults", default="all", help="'all' or comma-separated fault names ('none' = control)")
    b.add_argument("--seed", type=int, default=env_seed)
    b.add_argument("--out", default="bench-out")
    b.add_argument("--preset", choices=PRESETS, default="desk")
    b.add_argument("--window", type=int, default=30)
    b.add_argument("--epochs", type=int, default=5000)
    b.add_argument("--timing", choices=("work", "wall"), default="work",
                   help="elapsed_ticks from a deterministic work count or the wall clock")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="summarise a trials CSV per sample size")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--format", choices=("table", "csv"), default="table")
    r.set_defaults(func=cmd_report)

    o = sub.add_parser("oracle-check", help="verify RBM routines against exact enumeration")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"adf {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
