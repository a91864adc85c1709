import random
import time

import pytest

from netctrl.fixtures import seed_from_env

ACCEPTANCE_LINES: dict[int, str] = {}
SUITE_LIMIT_S = 60.0
_START = {}


@pytest.fixture
def rng():
    return random.Random(seed_from_env(12345))


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START.get("t", time.perf_counter())
    _START["elapsed"] = elapsed
    if ACCEPTANCE_LINES and elapsed >= SUITE_LIMIT_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
    elapsed = _START.get("elapsed", 0.0)
    verdict = "PASS" if elapsed < SUITE_LIMIT_S else "FAIL"
    terminalreporter.write_line(f"[{verdict}] criterion 12: total suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s)")
