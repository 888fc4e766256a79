"""High-level fitness tests deciding whether a host state is known-good.

Tests only look at the host's observable state (``Observation``), never at
injection records, so a fault is noticed the same way an operator would.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from adf.errors import InvalidArgument
from adf import simhost as sh

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitnessTest:
    name: str
    predicate: Callable[[sh.Observation], bool]
    description: str = ""


class TestResult(NamedTuple):
    name: str
    passed: bool
    diagnostic: str = ""


@dataclass(frozen=True)
class FitnessReport:
    results: tuple[TestResult, ...]

    @property
    def overall_valid(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]


def run_all(suite: Sequence[FitnessTest], host) -> FitnessReport:
    """Evaluate every test against one observation of ``host``; no short-circuit.

    A test that raises counts as failed and carries the exception text.
    """
    if not suite:
        raise InvalidArgument("fitness suite is empty")
    obs = host.observe()
    results = []
    for test in suite:
        try:
            results.append(TestResult(test.name, bool(test.predicate(obs))))
        except Exception as exc:
            log.warning("fitness test %s raised %r", test.name, exc)
            results.append(TestResult(test.name, False, f"{type(exc).__name__}: {exc}"))
    return FitnessReport(tuple(results))


def _running(obs, service):
    return obs.value(sh.SERVICE, service, "State") == "Running"


def _nic_up(obs):
    return (
        obs.value(sh.ADAPTER, sh.PRIMARY_NIC, "NetEnabled") == "true"
        and obs.value(sh.ADAPTER, sh.PRIMARY_NIC, "NetConnectionStatus") == "2"
    )


def _ip_up(obs):
    return obs.value(sh.ADAPTER_CONFIG, sh.PRIMARY_NIC, "IPEnabled") == "true" and bool(
        obs.value(sh.ADAPTER_CONFIG, sh.PRIMARY_NIC, "IPAddress")
    )


def web_service_responds(obs) -> bool:
    return (
        _running(obs, sh.WEB_SERVICE)
        and _nic_up(obs)
        and _ip_up(obs)
        and obs.row(sh.DISK, sh.WEBROOT_VOLUME) is not None
    )


def web_service_process_running(obs) -> bool:
    return _running(obs, sh.WEB_SERVICE) and obs.value(sh.SERVICE, sh.WEB_SERVICE, "Status") == "OK"


def webroot_volume_present(obs) -> bool:
    return obs.row(sh.DISK, sh.WEBROOT_VOLUME) is not None


def free_space_available(obs) -> bool:
    volumes = [obs.value(sh.DISK, v, "FreeSpace") for v in sh.VOLUMES]
    return all(v is None or int(v) > 0 for v in volumes)


def dns_resolver_responsive(obs) -> bool:
    resolver = obs.value(sh.ADAPTER_CONFIG, sh.PRIMARY_NIC, "DNSServerSearchOrder")
    return resolver not in (None, "", "0.0.0.0") and _running(obs, sh.DNS_SERVICE)


def external_connectivity(obs) -> bool:
    return _nic_up(obs) and _ip_up(obs) and obs.probes.get(sh.UPSTREAM_PROBE, False)


def default_suite() -> list[FitnessTest]:
    return [
        FitnessTest("web-service-responds", web_service_responds, "HTTP requests to the site succeed"),
        FitnessTest("web-service-process-running", web_service_process_running, "W3SVC is running and healthy"),
        FitnessTest("webroot-volume-present", webroot_volume_present, "the webroot volume is mounted"),
        FitnessTest("free-space-available", free_space_available, "every volume has free space"),
        FitnessTest("dns-resolver-responsive", dns_resolver_responsive, "resolver configured and DNS client running"),
        FitnessTest("external-connectivity", external_connectivity, "hosts beyond the gateway are reachable"),
    ]


SUITES = {"default": default_suite}


def register_suite(name: str, factory: Callable[[], list[FitnessTest]]) -> None:
    SUITES[name] = factory


def suite_by_name(name: str) -> list[FitnessTest]:
    try:
        return SUITES[name]()
    except KeyError:
        raise InvalidArgument(f"unknown fitness suite {name!r}; known: {', '.join(SUITES)}") from None
