import numpy as np
import pytest

from radonlaw import flux as fluxlib
from radonlaw.measure import Grid

# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def burgers_like():
    """phi(u) = u / (1 + u), the p = -1 power flux."""
    return fluxlib.power(-1.0)


@pytest.fixture
def unit_grid():
    return Grid.covering(-1.0, 1.0, 2.0**-6)
