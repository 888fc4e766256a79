import json
import signal
import subprocess
import sys
import time

import pytest

from adf import benchmark as B
from adf.cli import main
from adf.simhost import FaultKind


def run(*argv):
    return main([str(a) for a in argv])


def monitor_proc(store, *extra):
    return subprocess.Popen(
        [sys.executable, "-m", "adf", "monitor", "--store", str(store), "--epochs", "200", *map(str, extra)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )


def wait_for(pred, timeout=60.0):
    end = time.monotonic() + timeout
    while time.monotonic() < end:
        if pred():
            return True
        time.sleep(0.05)
    return False


# -- monitor ----------------------------------------------------------------

def test_monitor_healthy_run(tmp_path, capsys):
    assert run("monitor", "--store", tmp_path, "--interval", 0, "--max-polls", 3, "--seed", 1) == 0
    assert len(list((tmp_path / "snapshots").glob("*.json"))) == 3
    assert not (tmp_path / "leads").exists()
    assert capsys.readouterr().out.count("valid") == 3


def test_monitor_missing_config(tmp_path, capsys):
    assert run("monitor", "--store", tmp_path, "--host-config", tmp_path / "nope.json", "--max-polls", 1) == 2
    assert "nope.json" in capsys.readouterr().err


def test_monitor_picks_up_injection_mid_run(tmp_path):
    control = tmp_path / "control.json"
    proc = monitor_proc(tmp_path, "--interval", 0.25, "--max-polls", 16)
    try:
        assert wait_for(lambda: len(list((tmp_path / "snapshots").glob("*.json"))) >= 4)
        assert run("inject", "--fault", "stop-web-service", "--control", control) == 0
    finally:
        out, err = proc.communicate(timeout=120)
    assert proc.returncode == 0, err
    assert "INVALID" in out
    assert json.loads(control.read_text())["status"] == "active"
    report = next((tmp_path / "leads").glob("*.ndjson"))
    leads = [json.loads(line) for line in report.read_text().splitlines()[:-1]]
    assert ("W3SVC", "State") in [(l["row_key"], l["property"]) for l in leads]


def test_monitor_exits_cleanly_on_interrupt(tmp_path):
    proc = monitor_proc(tmp_path, "--interval", 5)
    assert wait_for(lambda: (tmp_path / "snapshots").is_dir())
    proc.send_signal(signal.SIGINT)
    proc.communicate(timeout=30)
    assert proc.returncode == 0


def test_env_overrides_store_and_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("ADF_STORE", str(tmp_path / "env-store"))
    monkeypatch.setenv("ADF_SEED", "77")
    assert run("monitor", "--interval", 0, "--max-polls", 2) == 0
    assert len(list((tmp_path / "env-store" / "snapshots").glob("*.json"))) == 2


# -- inject -----------------------------------------------------------------

def test_inject_writes_command(tmp_path):
    control = tmp_path / "c.json"
    assert run("inject", "--fault", "stop-web-service", "--control", control) == 0
    assert json.loads(control.read_text()) == {"command": "inject", "fault": "stop-web-service", "status": "pending"}


def test_inject_unknown_fault_lists_names(tmp_path, capsys):
    assert run("inject", "--fault", "bogus", "--control", tmp_path / "c.json") == 2
    err = capsys.readouterr().err
    assert all(k.value in err for k in FaultKind)


def test_double_injection_is_rejected(tmp_path, capsys):
    control = tmp_path / "c.json"
    assert run("inject", "--fault", "disable-nic", "--control", control) == 0
    assert run("inject", "--fault", "crash-ip-stack", "--control", control) == 2
    assert "protocol" in capsys.readouterr().err
    assert run("inject", "--clear", "--control", control) == 0
    assert run("inject", "--fault", "crash-ip-stack", "--control", control) == 0


# -- bench / report ---------------------------------------------------------

def test_bench_rejects_samples_over_window(tmp_path):
    assert run("bench", "--samples", 40, "--window", 30, "--out", tmp_path) == 2


def test_bench_rejects_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("bench", "--samples", 2, "--repeats", 1, "--faults", "none", "--out", blocker / "sub") == 2


def test_bench_is_reproducible(tmp_path):
    args = ["bench", "--samples", "3,5", "--repeats", 1, "--faults", "stop-web-service,none",
            "--epochs", 100, "--seed", 4]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("trials.csv", "aggregate.csv", "plot_precision.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = B.read_trials_csv((tmp_path / "a" / "trials.csv").read_text())
    assert len(rows) == 4


def test_report_table(tmp_path, capsys):
    recs = [
        B.BenchmarkRecord(B.TrialSpec(FaultKind.DISABLE_NIC, s, 0, 0), True, False, False, False, 0, 2, 5, 1.0, 1.0)
        for s in B.SAMPLE_SIZES
    ]
    path = tmp_path / "trials.csv"
    path.write_text(B.records_csv(recs))
    assert run("report", "--in", path) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 7
    assert run("report", "--in", path, "--format", "csv") == 0
    assert capsys.readouterr().out.startswith(",".join(B.AGGREGATE_FIELDS))


def test_report_empty_csv(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert run("report", "--in", path) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 1


def test_report_truncated_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(B.CSV_FIELDS) + "\ndisable-nic,5,0,1\n")
    assert run("report", "--in", path) == 2
    assert "line 2" in capsys.readouterr().err


# -- oracle-check -----------------------------------------------------------

@pytest.mark.slow
def test_oracle_check_passes(capsys):
    assert run("oracle-check") == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and all(l.startswith("PASS") and "deviation=" in l for l in out)


@pytest.mark.slow
def test_oracle_check_detects_corruption(capsys):
    assert run("oracle-check", "--corrupt") == 1
    assert "FAIL" in capsys.readouterr().out


def test_usage_errors_exit_2():
    assert run() == 2
    assert run("frobnicate") == 2
