import os

from hypothesis import HealthCheck, settings
import numpy as np
import pytest

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, name, ok, detail=""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
