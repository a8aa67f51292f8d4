"""Fault-severity-aware dynamic equivalents of full-converter wind farms."""
from .aggregate import (
    EquivalentFarm,
    EquivalentUnit,
    build_equivalent_farm,
    pcc_iteration,
    traditional_equivalent,
)
from .classify import Category, ClusterAssignment, classify_wtg
from .feeder_solver import FarmTopology, Feeder, radial_farm, solve_terminal_voltages
from .scenario import Scenario
from .simulate import FaultScenario, TimeSeries, compare, run
from .wake import WakeParams
from .wtg_control import CurrentState, TurbineParams

__version__ = "0.1.0"
