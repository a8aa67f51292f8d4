import numpy as np
import pytest

from wfequiv.feeder_solver import FarmTopology, Feeder
from wfequiv.simulate import FaultScenario
from wfequiv.wtg_control import TurbineParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def params():
    return TurbineParams()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def single_turbine_farm(params=None, z=0j, grid_z=0j, trafo_z=0j):
    return FarmTopology([Feeder([(0, 1, z)], [1])], trafo_z, grid_z, params or TurbineParams())


def forced_dip(alpha, t_fault=0.01, t_clear=0.05, t_end=0.07, dt=1e-3):
    """Ideal source stepping to ``alpha`` behind zero impedance."""
    return FaultScenario(1.0, alpha, t_fault, t_clear, t_end, dt)


def star_farm(n, params=None, z=0j):
    """``n`` turbines, each on its own branch straight off the PCC."""
    return FarmTopology([Feeder([(0, i, z) for i in range(1, n + 1)], list(range(1, n + 1)))],
                        0j, 0j, params or TurbineParams())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
