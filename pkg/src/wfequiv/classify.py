"""Response-category assignment from wind speed and fault-clearance voltage."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InputDomainError
from .wtg_control import TurbineParams, power_curve, power_curve_inverse


class Category(enum.IntEnum):
    I = 1  # ramped recovery after clearance
    II = 2  # limited during the fault, instant recovery
    III = 3  # active power unaffected


@dataclass(frozen=True)
class ClusterAssignment:
    category: Category
    v_w: float
    alpha_fminus: float
    p0: float
    p_cri1: float
    p_cri2: float


class CriticalSpeeds(NamedTuple):
    v_cri1: float
    v_cri2: float
    clamped1: bool
    clamped2: bool


def critical_powers(alpha: float, e: float, params: TurbineParams) -> tuple[float, float]:
    """Pre-fault powers at which the active headroom equals ``i_d0`` and ``i_d0/alpha``."""
    if not 0 <= alpha <= 1:
        raise InputDomainError("alpha must lie in [0, 1]")
    if e <= 0:
        raise InputDomainError("pre-fault voltage must be positive")
    a = min(max(alpha, params.lvrt_lower), params.lvrt_upper)
    if alpha > params.lvrt_upper:
        iq = 0.0
    else:
        iq = params.lvrt_gain * (params.lvrt_upper - a) * params.i_n
    rad = params.i_max**2 - iq**2
    p_cri1 = e * math.sqrt(rad) if rad > 0 else 0.0
    return p_cri1, alpha * p_cri1


def _speed_for(p: float, params: TurbineParams) -> tuple[float, bool]:
    if p >= params.rated_power:
        return params.v_rated, p > params.rated_power
    if p <= 0:
        return params.v_cutin, True
    return power_curve_inverse(p, params, return_flag=True)


def critical_speeds(alpha: float, e: float, params: TurbineParams) -> CriticalSpeeds:
    p1, p2 = critical_powers(alpha, e, params)
    v1, c1 = _speed_for(p1, params)
    v2, c2 = _speed_for(p2, params)
    return CriticalSpeeds(v1, v2, c1, c2)


def classify_wtg(v_w: float, alpha: float, e: float, params: TurbineParams) -> ClusterAssignment:
    p0 = power_curve(v_w, params)
    p_cri1, p_cri2 = critical_powers(alpha, e, params)
    if p0 <= 0 or alpha > params.lvrt_upper:
        cat = Category.III
    elif p0 > p_cri1:
        cat = Category.I
    elif p0 > p_cri2:
        cat = Category.II
    else:
        cat = Category.III
    return ClusterAssignment(cat, float(v_w), float(alpha), p0, p_cri1, p_cri2)


@dataclass(frozen=True)
class BoundaryRow:
    alpha: float
    v_cri1: float
    v_cri2: float
    clamped1: bool
    clamped2: bool

    @property
    def clamped_flags(self) -> str:
        flags = [name for name, on in (("v_cri1", self.clamped1), ("v_cri2", self.clamped2)) if on]
        return "|".join(flags) if flags else "none"


def boundary_table(alpha_grid, e: float, params: TurbineParams) -> list[BoundaryRow]:
    rows = []
    for a in alpha_grid:
        s = critical_speeds(float(a), e, params)
        rows.append(BoundaryRow(float(a), s.v_cri1, s.v_cri2, s.clamped1, s.clamped2))
    return rows


def write_boundary_csv(rows: list[BoundaryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "v_cri1", "v_cri2", "clamped_flags"])
        for r in rows:
            w.writerow([repr(r.alpha), repr(r.v_cri1), repr(r.v_cri2), r.clamped_flags])
