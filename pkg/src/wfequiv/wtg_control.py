"""Quasi-static control law of one full-converter (PMSG) wind turbine.

All electrical quantities are per-unit on the single-machine base with
``P = U * i_d`` and ``Q = U * i_q``.  The scalar cores (leading underscore)
are numba-compiled so the time-domain kernel in :mod:`wfequiv.simulate`
shares one implementation of the law with the public API below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import InputDomainError, SingularVoltageError

VOLTAGE_FLOOR = 0.01


@dataclass(frozen=True)
class TurbineParams:
    rated_power: float = 1.0
    i_n: float = 1.0
    i_max: float = 1.1
    k_ramp: float = 0.5
    v_cutin: float = 3.5
    v_rated: float = 11.1
    lvrt_gain: float = 1.5
    lvrt_lower: float = 0.2
    lvrt_upper: float = 0.9

    def __post_init__(self):
        if not (self.i_max >= self.i_n > 0):
            raise InputDomainError(f"need i_max >= i_n > 0, got {self.i_max}, {self.i_n}")
        if self.k_ramp <= 0:
            raise InputDomainError("k_ramp must be positive")
        if not (0 < self.v_cutin < self.v_rated):
            raise InputDomainError("need 0 < v_cutin < v_rated")
        if not (0 <= self.lvrt_lower < self.lvrt_upper < 1):
            raise InputDomainError("need 0 <= lvrt_lower < lvrt_upper < 1")
        if self.rated_power <= 0 or self.lvrt_gain <= 0:
            raise InputDomainError("rated_power and lvrt_gain must be positive")

    def law(self):
        """Tuple of the constants the compiled kernels take, in kernel order."""
        return (self.i_n, self.i_max, self.lvrt_gain, self.lvrt_lower, self.lvrt_upper)


@dataclass(frozen=True)
class CurrentState:
    i_d: float
    i_q: float
    i_d0: float
    e0: float

    @classmethod
    def steady(cls, p0: float, e0: float = 1.0) -> "CurrentState":
        """Pre-fault operating point delivering ``p0`` at terminal voltage ``e0``."""
        i_d0 = p0 / e0
        return cls(i_d=i_d0, i_q=0.0, i_d0=i_d0, e0=e0)


# -- compiled scalar cores -------------------------------------------------

@njit(cache=True)
def _iq_ref(u, i_n, i_max, gain, lower, upper):
    if u > upper:
        return 0.0
    if u < lower:
        u = lower
    iq = gain * (upper - u) * i_n
    return iq if iq < i_max else i_max


@njit(cache=True)
def _id_max(u, i_n, i_max, gain, lower, upper):
    iq = _iq_ref(u, i_n, i_max, gain, lower, upper)
    if iq >= i_max:
        return 0.0
    return math.sqrt(i_max * i_max - iq * iq)


@njit(cache=True)
def _id_ref(i_d0, e0, u, i_n, i_max, gain, lower, upper):
    if u < VOLTAGE_FLOOR:
        u = VOLTAGE_FLOOR
    if u <= upper:
        a = i_d0 / u
        b = _id_max(u, i_n, i_max, gain, lower, upper)
        return a if a < b else b
    a = i_d0 * (e0 / u)
    return a if a < i_max else i_max


@njit(cache=True)
def _step(i_d, i_d0, e0, u, dt, rate, i_n, i_max, gain, lower, upper):
    iq = _iq_ref(u, i_n, i_max, gain, lower, upper)
    target = _id_ref(i_d0, e0, u, i_n, i_max, gain, lower, upper)
    if u <= upper or target <= i_d:
        idn = target
    else:
        idn = i_d + rate * dt
        if idn > target:
            idn = target
    # reactive priority on the current circle
    if idn * idn + iq * iq > i_max * i_max:
        rem = i_max * i_max - iq * iq
        idn = math.sqrt(rem) if rem > 0.0 else 0.0
    return idn, iq


# -- public API ------------------------------------------------------------

def power_curve(v_w, params: TurbineParams):
    """Steady-state active power for wind speed ``v_w`` (cubic MPPT law).

    Accepts scalars or arrays; zero below cut-in, flat above rated speed.
    """
    v = np.asarray(v_w, dtype=float)
    if np.any(v < 0) or np.any(np.isnan(v)):
        raise InputDomainError("wind speed must be non-negative")
    p = np.where(
        v < params.v_cutin,
        0.0,
        np.where(v <= params.v_rated, params.rated_power * (v / params.v_rated) ** 3, params.rated_power),
    )
    return float(p) if p.ndim == 0 else p


def power_curve_inverse(p: float, params: TurbineParams, *, return_flag: bool = False):
    """Wind speed on ``[v_cutin, v_rated]`` producing power ``p``.

    Powers below the cut-in output are unreachable; ``v_cutin`` is returned
    and, with ``return_flag=True``, the flag is set.
    """
    if not (0 < p <= params.rated_power):
        raise InputDomainError(f"power {p} outside (0, rated_power]")
    v = params.v_rated * (p / params.rated_power) ** (1.0 / 3.0)
    unreachable = v < params.v_cutin
    if unreachable:
        v = params.v_cutin
    v = min(v, params.v_rated)
    return (v, bool(unreachable)) if return_flag else v


def iq_ref(u_t: float, params: TurbineParams) -> float:
    if u_t < 0:
        raise InputDomainError("terminal voltage must be non-negative")
    return _iq_ref(float(u_t), *params.law())


def id_max(u_t: float, params: TurbineParams) -> float:
    """Active-current headroom left once the reactive reference is served."""
    if u_t < 0:
        raise InputDomainError("terminal voltage must be non-negative")
    return _id_max(float(u_t), *params.law())


def id_ref(state: CurrentState, u_t: float, params: TurbineParams) -> float:
    """Active-current reference.

    Inside the LVRT band (``u_t <= lvrt_upper``) the dc-link balance asks for
    ``i_d0 / u_t`` and reactive priority caps it at :func:`id_max`.  Above the
    band the turbine tracks its pre-fault power, ``i_d0 * e0 / u_t``, capped
    at ``i_max``.  Voltages below :data:`VOLTAGE_FLOOR` are floored.
    """
    if u_t <= 0:
        raise SingularVoltageError("id_ref needs a positive terminal voltage")
    return _id_ref(state.i_d0, state.e0, float(u_t), *params.law())


def step_current(
    state: CurrentState, u_t: float, dt: float, params: TurbineParams, rate: float | None = None
) -> CurrentState:
    """Advance the current references by one step of length ``dt``.

    ``rate`` overrides ``params.k_ramp`` as the upward slew limit; the
    equivalent units use it to follow a piecewise ramp schedule.
    """
    if dt <= 0:
        raise InputDomainError("dt must be positive")
    if u_t < 0:
        raise InputDomainError("terminal voltage must be non-negative")
    k = params.k_ramp if rate is None else rate
    i_d, i_q = _step(state.i_d, state.i_d0, state.e0, float(u_t), float(dt), float(k), *params.law())
    return replace(state, i_d=i_d, i_q=i_q)
