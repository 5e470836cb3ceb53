import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("geomc", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("geomc")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line; echoed at the end of the run."""

    def _report(number, name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({name}): {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
