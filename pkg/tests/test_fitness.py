import pytest

from adf.errors import InvalidArgument
from adf.fitness import (
    FitnessTest,
    default_suite,
    register_suite,
    run_all,
    suite_by_name,
)
from adf.simhost import FaultKind, SimHost


@pytest.fixture
def host(still_desk):
    h = SimHost(still_desk, seed=2)
    h.sample()
    return h


def test_healthy_host_passes_everything(host):
    report = run_all(default_suite(), host)
    assert report.overall_valid and report.failed == []


def test_stopped_web_service_fails(host):
    host.inject(FaultKind.STOP_WEB_SERVICE)
    host.sample()
    report = run_all(default_suite(), host)
    assert not report.overall_valid
    assert "web-service-responds" in report.failed


def test_empty_suite_is_rejected(host):
    with pytest.raises(InvalidArgument):
        run_all([], host)


def test_default_suite_shape():
    suite = default_suite()
    assert len(suite) == 6
    assert len({t.name for t in suite}) == 6


def test_each_fault_trips_a_test(still_desk):
    tripped = {}
    for kind in FaultKind:
        h = SimHost(still_desk, seed=2)
        h.sample()
        h.inject(kind)
        h.sample()
        tripped[kind] = frozenset(run_all(default_suite(), h).failed)
        assert tripped[kind], kind
    local = [tripped[k] for k in FaultKind if k.locally_grounded]
    assert len(set().union(*local)) >= 5


def test_upstream_outage_only_fails_connectivity(still_desk):
    h = SimHost(still_desk, seed=2)
    h.sample()
    h.inject(FaultKind.UPSTREAM_NETWORK_DOWN)
    h.sample()
    assert run_all(default_suite(), h).failed == ["external-connectivity"]


def test_raising_test_is_recorded_not_fatal(host):
    def boom(obs):
        raise RuntimeError("probe timed out")

    suite = [FitnessTest("boom", boom)] + default_suite()
    report = run_all(suite, host)
    assert len(report.results) == 7
    assert report.failed == ["boom"]
    assert "probe timed out" in report.results[0].diagnostic


def test_no_short_circuit(host):
    calls = []

    def record(name, result):
        def pred(obs):
            calls.append(name)
            return result
        return FitnessTest(name, pred)

    report = run_all([record("a", False), record("b", True), record("c", False)], host)
    assert calls == ["a", "b", "c"]
    assert report.failed == ["a", "c"]


def test_outcome_depends_only_on_current_state(host):
    host.inject(FaultKind.CRASH_DNS_SERVICE)
    host.sample()
    assert not run_all(default_suite(), host).overall_valid
    host.clear_faults()
    host.sample()
    first = run_all(default_suite(), host)
    second = run_all(default_suite(), host)
    assert first == second and first.overall_valid


def test_named_suites():
    register_suite("web-only", lambda: default_suite()[:2])
    assert len(suite_by_name("web-only")) == 2
    assert len(suite_by_name("default")) == 6
    with pytest.raises(InvalidArgument):
        suite_by_name("nope")
