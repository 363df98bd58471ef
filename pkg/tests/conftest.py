import math

import pytest

from rosar.data import load_default_table
from rosar.geometry import RadarConfig
from rosar.synthesis import SynthesisParams


@pytest.fixture(scope="session")
def cfg():
    return RadarConfig()


@pytest.fixture(scope="session")
def default_table():
    return load_default_table()


@pytest.fixture(scope="session")
def small_cfg():
    # 64 elements keep the windows short enough for quick SCA runs
    return RadarConfig(N=64)


@pytest.fixture(scope="session")
def small_params():
    return SynthesisParams(eta=0.05, phi_MW=math.radians(8), grid_step=math.radians(3), U_min=1.0)


_ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """``report(n, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(n, ok, detail):
        _ACCEPTANCE_LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[n])
