import numpy as np
import pytest

from ris_lab.config import SystemConfig


@pytest.fixture
def small_cfg():
    return SystemConfig(K=3, M=2, L=4, mu=2, rng_seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config._criteria = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    def record(n, ok, detail):
        request.config._criteria.append((n, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(getattr(config, "_criteria", []), key=lambda x: x[0])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in lines:
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
