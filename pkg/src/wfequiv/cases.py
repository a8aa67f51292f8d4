"""Desk-scale analogues of the two validation contingencies.

The farm is a set of chain feeders (2 km to the first turbine, 0.5 km
spacing, 35 kV cable) behind a transformer and a Thevenin grid of short-circuit
ratio about ten on the farm rating.  A deep dip of the source puts the PCC
near 0.25 pu (ramped and current-limited turbines, none unaffected); a
shallow one near 0.55-0.6 pu (no ramped turbines).
"""
from __future__ import annotations

from .feeder_solver import radial_farm
from .scenario import Scenario
from .simulate import FaultScenario
from .wtg_control import TurbineParams

# farm-base impedances, rescaled to the single-machine base per farm size
GRID_Z_FARM = 0.006 + 0.06j
TRAFO_Z_FARM = 0.004 + 0.04j

DEEP_DIP = 0.16
SHALLOW_DIP = 0.55


def farm_scenario(turbines_per_feeder, e_source_fault: float, seed: int = 7, t_end: float = 1.8,
                  dt: float = 1e-3, params: TurbineParams | None = None) -> Scenario:
    n = sum(turbines_per_feeder)
    # machine-base per-unit: farm-base impedance times the machine/farm rating ratio
    farm = radial_farm(
        list(turbines_per_feeder),
        pcc_transformer_z=TRAFO_Z_FARM / n,
        grid_thevenin_z=GRID_Z_FARM / n,
        params=params,
    )
    fault = FaultScenario(e_source_prefault=1.0, e_source_fault=e_source_fault,
                          t_fault=0.1, t_clear=0.2, t_end=t_end, dt=dt)
    return Scenario(farm=farm, fault=fault, seed=seed)


def case_deep(seed: int = 7, **kw) -> Scenario:
    """24 turbines on 4 feeders, nearby-fault analogue."""
    return farm_scenario([6] * 4, DEEP_DIP, seed=seed, **kw)


def case_shallow(seed: int = 7, **kw) -> Scenario:
    """24 turbines on 4 feeders, distant-fault analogue."""
    return farm_scenario([6] * 4, SHALLOW_DIP, seed=seed, **kw)


def case_full(e_source_fault: float = DEEP_DIP, seed: int = 7, **kw) -> Scenario:
    """100 turbines on 16 feeders (four of seven, twelve of six)."""
    return farm_scenario([7] * 4 + [6] * 12, e_source_fault, seed=seed, **kw)
