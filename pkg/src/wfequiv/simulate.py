"""Quasi-static phasor simulation of a detailed or equivalent farm behind a
Thevenin grid with a programmable fault.

Each step first advances every unit's current references from the previous
step's terminal voltage, then solves the network algebraically: source,
external impedance, PCC and collector paths, by the same branch-node fixed
point the terminal-voltage solver uses, extended with the PCC node.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import block_diag

from .aggregate import EquivalentFarm
from .errors import InputDomainError, NonConvergenceError
from .feeder_solver import FarmTopology, path_impedance_matrix
from .wtg_control import TurbineParams, _step, power_curve


@dataclass(frozen=True)
class FaultScenario:
    e_source_prefault: float = 1.0
    e_source_fault: float = 0.1
    t_fault: float = 0.1
    t_clear: float = 0.2
    t_end: float = 1.5
    dt: float = 1e-3
    grid_thevenin_z: complex | None = None  # overrides the farm's value when set
    fault_impedance: complex | None = None  # shunt fault at the grid side of the transformer

    def __post_init__(self):
        if not (0 <= self.t_fault < self.t_clear <= self.t_end):
            raise InputDomainError("need 0 <= t_fault < t_clear <= t_end")
        if self.dt <= 0:
            raise InputDomainError("dt must be positive")
        if self.e_source_fault > self.e_source_prefault:
            raise InputDomainError("fault source voltage above pre-fault value")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt)) + 1

    @property
    def fault_index(self) -> int:
        return int(round(self.t_fault / self.dt))

    @property
    def clear_index(self) -> int:
        return int(round(self.t_clear / self.dt))

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt

    def source_profile(self, grid_z: complex, trafo_z: complex):
        """Per-step Thevenin voltage and impedance seen from the PCC."""
        zg = complex(self.grid_thevenin_z) if self.grid_thevenin_z is not None else complex(grid_z)
        n = self.n_steps
        e = np.full(n, complex(self.e_source_prefault))
        z = np.full(n, zg + complex(trafo_z))
        fault = slice(self.fault_index, self.clear_index)
        if self.fault_impedance is None:
            e[fault] = self.e_source_fault
        else:
            zf = complex(self.fault_impedance)
            e[fault] = self.e_source_prefault * zf / (zg + zf)
            z[fault] = complex(trafo_z) + (zg * zf / (zg + zf) if zg + zf != 0 else 0j)
        return e, z


@dataclass
class TimeSeries:
    t: np.ndarray
    p_pcc: np.ndarray
    q_pcc: np.ndarray
    u_pcc: np.ndarray
    unit_voltage: np.ndarray | None = None  # complex, steps x units
    unit_current: np.ndarray | None = None  # complex injections, steps x units
    wall_time: float = float("nan")
    iterations: np.ndarray | None = None
    damped_steps: int = 0

    @property
    def unit_power(self) -> np.ndarray:
        return (self.unit_voltage * np.conj(self.unit_current)).real

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "p_pcc", "q_pcc", "u_pcc"])
            for row in zip(self.t, self.p_pcc, self.q_pcc, self.u_pcc):
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != ["t", "p_pcc", "q_pcc", "u_pcc"]:
                raise InputDomainError(f"unexpected time-series header {header}")
            data = np.array([[float(x) for x in row] for row in r if row])
        data = data.reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


@dataclass
class _Plant:
    """Units, each on its own node, and the node-to-node path impedances."""

    zpath: np.ndarray
    scale: np.ndarray
    p0: np.ndarray  # per machine
    params: TurbineParams
    grid_z: complex
    trafo_z: complex
    sched_t: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    sched_rate: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    sched_len: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def _plant_from_farm(farm: FarmTopology, speeds) -> _Plant:
    speeds = np.asarray(speeds, dtype=float)
    if speeds.shape != (farm.n_turbines,):
        raise InputDomainError(f"expected {farm.n_turbines} wind speeds")
    zpath = block_diag(*[path_impedance_matrix(f) for f in farm.feeders]).astype(complex)
    n = farm.n_turbines
    return _Plant(zpath, np.ones(n), power_curve(speeds, farm.params) * np.ones(n), farm.params,
                  farm.grid_thevenin_z, farm.pcc_transformer_z,
                  np.zeros((n, 1)), np.zeros((n, 1)), np.zeros(n, dtype=np.int64))


def _plant_from_equivalent(eq: EquivalentFarm) -> _Plant:
    n = len(eq.units)
    width = max([1] + [len(u.ramp_schedule) for u in eq.units])
    st = np.zeros((n, width))
    sr = np.zeros((n, width))
    sl = np.zeros(n, dtype=np.int64)
    for k, u in enumerate(eq.units):
        for j, (tb, rate) in enumerate(u.ramp_schedule):
            st[k, j], sr[k, j] = tb, rate
        sl[k] = len(u.ramp_schedule)
    return _Plant(
        np.diag([u.line_z for u in eq.units]).astype(complex),
        np.array([float(u.n_machines) for u in eq.units]),
        np.array([float(power_curve(u.v_eq, eq.params)) for u in eq.units]),
        eq.params, eq.grid_thevenin_z, eq.pcc_transformer_z, st, sr, sl,
    )


def _plant(model, speeds) -> _Plant:
    if isinstance(model, EquivalentFarm):
        return _plant_from_equivalent(model)
    if isinstance(model, FarmTopology):
        return _plant_from_farm(model, speeds)
    raise TypeError(f"cannot simulate {type(model).__name__}")


@dataclass
class PrefaultState:
    u: np.ndarray  # complex terminal voltages
    u_pcc: complex
    e0: np.ndarray
    i_d0: np.ndarray


def _prefault(plant: _Plant, e_src: complex, z_ext: complex, tol=1e-13, max_iter=500) -> PrefaultState:
    s = plant.scale * plant.p0
    u = np.full(len(s), e_src, dtype=complex)
    u_pcc = complex(e_src)
    for _ in range(max_iter):
        inj = np.conj(s / u)
        u_pcc_new = e_src + z_ext * inj.sum()
        u_new = u_pcc_new + plant.zpath @ inj
        res = max(np.max(np.abs(u_new - u), initial=0.0), abs(u_pcc_new - u_pcc))
        u, u_pcc = u_new, u_pcc_new
        if res < tol:
            e0 = np.abs(u)
            i_d0 = np.minimum(plant.p0 / e0, plant.params.i_max)
            return PrefaultState(u, u_pcc, e0, i_d0)
    raise NonConvergenceError("pre-fault load flow did not converge", residual=res)


def prefault_state(model, speeds, scenario: FaultScenario) -> PrefaultState:
    plant = _plant(model, speeds)
    e, z = scenario.source_profile(plant.grid_z, plant.trafo_z)
    return _prefault(plant, e[0], z[0])


@njit(cache=True)
def _kernel(zpath, scale, i_d0, e0, u0, upcc0, sched_t, sched_rate, sched_len,
            e_src, z_ext, dt, tol, max_iter, k_ramp, i_n, i_max, gain, lower, upper):
    n_steps = e_src.shape[0]
    n = scale.shape[0]
    u = u0.copy()
    upcc = upcc0
    i_d = i_d0.copy()
    i_q = np.zeros(n)
    in_lvrt = np.zeros(n, dtype=np.bool_)
    t_rec = np.full(n, -1.0)
    inj = np.zeros(n, dtype=np.complex128)
    u_new = np.zeros(n, dtype=np.complex128)

    p_out = np.zeros(n_steps)
    q_out = np.zeros(n_steps)
    upcc_out = np.zeros(n_steps)
    uv_out = np.zeros((n_steps, n), dtype=np.complex128)
    ui_out = np.zeros((n_steps, n), dtype=np.complex128)
    it_out = np.zeros(n_steps, dtype=np.int64)
    damped = 0

    for k in range(n_steps):
        t = k * dt
        for m in range(n):
            um = abs(u[m])
            rate = k_ramp
            if um <= upper:
                in_lvrt[m] = True
            else:
                if in_lvrt[m]:
                    in_lvrt[m] = False
                    t_rec[m] = t
                if sched_len[m] > 0 and t_rec[m] >= 0.0:
                    tau = t - t_rec[m]
                    rate = sched_rate[m, 0]
                    for j in range(sched_len[m]):
                        if tau >= sched_t[m, j]:
                            rate = sched_rate[m, j]
            i_d[m], i_q[m] = _step(i_d[m], i_d0[m], e0[m], um, dt, rate, i_n, i_max, gain, lower, upper)

        converged = False
        prev_res = 1e300
        growth = 0
        relax = 1.0
        for it in range(max_iter):
            total = 0j
            for m in range(n):
                mag = abs(u[m])
                if mag > 1e-12:
                    ph = u[m] / mag
                else:
                    ph = 1.0 + 0j
                inj[m] = scale[m] * (i_d[m] - 1j * i_q[m]) * ph
                total += inj[m]
            upcc_new = e_src[k] + z_ext[k] * total
            res = abs(upcc_new - upcc)
            for a in range(n):
                acc = upcc_new
                for b in range(n):
                    acc += zpath[a, b] * inj[b]
                u_new[a] = acc
                d = abs(acc - u[a])
                if d > res:
                    res = d
            if res > prev_res:
                growth += 1
            else:
                growth = 0
            if growth >= 3 and relax == 1.0:
                relax = 0.5
                damped += 1
            prev_res = res
            for a in range(n):
                u[a] = u[a] + relax * (u_new[a] - u[a])
            upcc = upcc + relax * (upcc_new - upcc)
            if res < tol:
                converged = True
                it_out[k] = it + 1
                break
        if not converged:
            return p_out, q_out, upcc_out, uv_out, ui_out, it_out, damped, k

        # currents consistent with the accepted voltages
        total = 0j
        for m in range(n):
            mag = abs(u[m])
            ph = u[m] / mag if mag > 1e-12 else 1.0 + 0j
            inj[m] = scale[m] * (i_d[m] - 1j * i_q[m]) * ph
            total += inj[m]
            uv_out[k, m] = u[m]
            ui_out[k, m] = inj[m]
        s = upcc * np.conj(total)
        p_out[k] = s.real
        q_out[k] = s.imag
        upcc_out[k] = abs(upcc)
    return p_out, q_out, upcc_out, uv_out, ui_out, it_out, damped, -1


def run(model, speeds, scenario: FaultScenario, tol: float = 1e-11, max_iter: int = 200) -> TimeSeries:
    """Simulate ``model`` (a :class:`FarmTopology` with ``speeds``, or an
    :class:`EquivalentFarm`, whose speeds are implied) through ``scenario``."""
    t0 = time.perf_counter()
    plant = _plant(model, speeds)
    e_src, z_ext = scenario.source_profile(plant.grid_z, plant.trafo_z)
    pre = _prefault(plant, e_src[0], z_ext[0])
    prm = plant.params
    p, q, upcc, uv, ui, its, damped, fail = _kernel(
        plant.zpath, plant.scale, pre.i_d0, pre.e0, pre.u, pre.u_pcc,
        plant.sched_t, plant.sched_rate, plant.sched_len,
        e_src, z_ext, scenario.dt, tol, max_iter,
        prm.k_ramp, *prm.law(),
    )
    if fail >= 0:
        raise NonConvergenceError(f"network solve failed at step {fail}", step=int(fail))
    return TimeSeries(scenario.times(), p, q, upcc, uv, ui, time.perf_counter() - t0, its, int(damped))


def compare(a: TimeSeries, b: TimeSeries, window: tuple[float, float] | None = None) -> dict:
    """Errors of ``a`` against the reference ``b`` over ``window``.

    MAPE of the PCC active power uses ``max(|b|, 0.01)`` as denominator.
    """
    if a.t.shape != b.t.shape or not np.allclose(a.t, b.t, rtol=0, atol=1e-12):
        raise InputDomainError("time grids differ")
    if window is None:
        mask = np.ones(a.t.shape, dtype=bool)
    else:
        mask = (a.t >= window[0] - 1e-12) & (a.t <= window[1] + 1e-12)
    if not mask.any():
        raise InputDomainError("window selects no samples")
    dp = a.p_pcc[mask] - b.p_pcc[mask]
    denom = np.maximum(np.abs(b.p_pcc[mask]), 0.01)
    ratio = a.wall_time / b.wall_time if np.isfinite(a.wall_time) and np.isfinite(b.wall_time) and b.wall_time > 0 else None
    return {
        "mape_pct": float(100.0 * np.mean(np.abs(dp) / denom)),
        "max_abs_p": float(np.max(np.abs(dp))),
        "max_abs_q": float(np.max(np.abs(a.q_pcc[mask] - b.q_pcc[mask]))),
        "wall_clock_ratio": ratio,
        "n_samples": int(mask.sum()),
    }
