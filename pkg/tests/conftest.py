from dataclasses import replace

import numpy as np
import pytest

from adf.simhost import HostConfig, load_preset


def still(config: HostConfig) -> HostConfig:
    """Same layout with every property frozen (volatility 0)."""
    classes = tuple(
        replace(c, properties=tuple(replace(p, volatility=0.0) for p in c.properties))
        for c in config.classes
    )
    return HostConfig(config.name, config.seed, classes, 0.0)


@pytest.fixture(scope="session")
def desk():
    return load_preset("desk")


@pytest.fixture(scope="session")
def still_desk(desk):
    return still(desk)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line, then assert it."""
    lines = request.config.stash[VERDICTS]

    def record(criterion: str, ok: bool, detail: str):
        lines.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0].rstrip("ab"))):
            terminalreporter.write_line(line)
