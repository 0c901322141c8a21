import math

import numpy as np
import pytest

from hypres.modes import Funnel

TWO_PI = 2 * math.pi


@pytest.fixture(scope="session")
def funnel_r1():
    return Funnel(TWO_PI, 1.0)


@pytest.fixture(scope="session")
def truncated_set_14(funnel_r1):
    """Truncated funnel (ell = 2 pi, r0 = 1) resonances out to radius 14; shared by several tests."""
    from hypres.resonances import resonance_set
    return resonance_set(funnel_r1, 14.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_REPORT_LINES = []


def report(name: str, ok: bool, detail: str = ""):
    """One line per checked criterion; collected for the terminal summary and echoed with -s."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    _REPORT_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT_LINES:
            terminalreporter.write_line(line)
