"""Jensen (top-hat) wake deficit along a single row of turbines."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputDomainError


@dataclass(frozen=True)
class WakeParams:
    c_t: float = 0.2
    k_decay: float = 0.04
    rotor_radius: float = 40.0
    spacing: float = 500.0

    def __post_init__(self):
        if not 0 < self.c_t < 1:
            raise InputDomainError("thrust coefficient must lie in (0, 1)")
        if self.k_decay <= 0 or self.rotor_radius <= 0 or self.spacing <= 0:
            raise InputDomainError("k_decay, rotor_radius and spacing must be positive")


def deficit_factor(p: WakeParams) -> float:
    """Speed ratio between consecutive turbines of a row."""
    expansion = p.rotor_radius / (p.rotor_radius + p.k_decay * p.spacing)
    return 1.0 - (1.0 - np.sqrt(1.0 - p.c_t)) * expansion**2


def feeder_speeds(v_w0: float, n: int, p: WakeParams) -> list[float]:
    if n < 1:
        raise InputDomainError("a feeder needs at least one turbine")
    if v_w0 < 0:
        raise InputDomainError("free-stream speed must be non-negative")
    dec = deficit_factor(p)
    speeds = [float(v_w0)]
    for _ in range(n - 1):
        speeds.append(speeds[-1] * dec)
    return speeds


def draw_inflow(seed: int, n_feeders: int, low: float = 9.0, high: float = 11.0) -> list[float]:
    """Free-stream speed per feeder, uniform on ``[low, high]``.

    Each feeder gets its own generator keyed on ``(seed, feeder index)``, so a
    feeder's draw does not depend on how many other feeders exist.
    """
    return [float(np.random.default_rng([seed, i]).uniform(low, high)) for i in range(n_feeders)]


def farm_speeds(inflow: list[float], counts: list[int], p: WakeParams) -> list[float]:
    """Concatenate per-feeder wake-decayed speeds in global turbine order."""
    out: list[float] = []
    for v0, n in zip(inflow, counts):
        out.extend(feeder_speeds(v0, n, p))
    return out
