"""Equivalent-farm construction: one scaled unit per response category.

A unit reproduces its cluster's pre-fault power through an equivalent wind
speed, its clearance-time reactive power through an equivalent terminal
voltage, and its PCC voltage through an equivalent collector line with the
physical R/X ratio.  Category-I units also carry a piecewise ramp schedule
so the aggregate recovers like the sum of its members.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import Category, classify_wtg
from .errors import ClassificationInconsistencyError, InfeasibleEquivalentError, InputDomainError, NonConvergenceError
from .feeder_solver import FarmTopology, build_incidence, path_impedance_matrix, solve_terminal_voltages
from .wtg_control import TurbineParams, id_max, id_ref, iq_ref, power_curve, power_curve_inverse, CurrentState


@dataclass
class EquivalentUnit:
    category: Category | None
    n_machines: int
    v_eq: float
    ramp_schedule: list = field(default_factory=list)  # (t_breakpoint, rate) pairs
    line_r: float = 0.0
    line_x: float = 0.0
    q_equ: float = 0.0
    alpha_equ: float = 1.0
    p_equ: float = 0.0
    members: list = field(default_factory=list)  # 0-based turbine indices

    @property
    def line_z(self) -> complex:
        return complex(self.line_r, self.line_x)


@dataclass
class EquivalentFarm:
    units: list
    pcc_voltage_used: float
    params: TurbineParams = field(default_factory=TurbineParams)
    pcc_transformer_z: complex = 0j
    grid_thevenin_z: complex = 0j
    notes: list = field(default_factory=list)

    @property
    def n_turbines(self) -> int:
        return sum(u.n_machines for u in self.units)

    def to_dict(self) -> dict:
        units = []
        for u in self.units:
            d = asdict(u)
            d["category"] = None if u.category is None else u.category.name
            d["ramp_schedule"] = [list(map(float, s)) for s in u.ramp_schedule]
            units.append(d)
        return {
            "pcc_voltage_used": self.pcc_voltage_used,
            "pcc_transformer_z": [self.pcc_transformer_z.real, self.pcc_transformer_z.imag],
            "grid_thevenin_z": [self.grid_thevenin_z.real, self.grid_thevenin_z.imag],
            "params": asdict(self.params),
            "units": units,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EquivalentFarm":
        units = []
        for u in d["units"]:
            u = dict(u)
            u["category"] = None if u["category"] is None else Category[u["category"]]
            u["ramp_schedule"] = [tuple(s) for s in u["ramp_schedule"]]
            units.append(EquivalentUnit(**u))
        return cls(
            units=units,
            pcc_voltage_used=d["pcc_voltage_used"],
            params=TurbineParams(**d["params"]),
            pcc_transformer_z=complex(*d["pcc_transformer_z"]),
            grid_thevenin_z=complex(*d["grid_thevenin_z"]),
            notes=list(d.get("notes", [])),
        )

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def equivalent_wind_speed(cluster_speeds, params: TurbineParams) -> float:
    """Speed whose power equals the cluster's mean power."""
    speeds = list(cluster_speeds)
    if not speeds:
        raise InputDomainError("empty cluster")
    mean_p = float(np.mean(power_curve(np.asarray(speeds, dtype=float), params)))
    if mean_p <= 0:
        return float(min(speeds))
    return power_curve_inverse(mean_p, params)


def ramp_durations(cluster, e, params: TurbineParams) -> list[float]:
    """Time each category-I member needs to ramp back from its fault-time
    active-current limit to its pre-fault current, sorted ascending.

    ``cluster`` holds ``(v_w, alpha)`` pairs; ``e`` is a scalar or one
    pre-fault voltage per member.
    """
    cluster = list(cluster)
    e_arr = np.broadcast_to(np.asarray(e, dtype=float), (len(cluster),))
    out = []
    for (v, a), ei in zip(cluster, e_arr):
        t = (power_curve(v, params) / ei - id_max(a, params)) / params.k_ramp
        if t < -1e-12:
            raise ClassificationInconsistencyError(f"member (v={v}, alpha={a}) has no ramp to recover")
        out.append(max(t, 0.0))
    return sorted(out)


def klim_schedule(durations_sorted, params: TurbineParams) -> list[tuple[float, float]]:
    """Piecewise-constant per-machine ramp rate of an aggregate of N machines.

    Starts at ``k``; after the j-th member completes, ``(N - j) k / N``;
    after the last member, ``k / N``.
    """
    t = list(durations_sorted)
    n = len(t)
    if n < 1:
        raise InputDomainError("schedule needs at least one duration")
    if any(b < a for a, b in zip(t, t[1:])):
        raise InputDomainError("durations must be sorted ascending")
    k = params.k_ramp
    sched = [(0.0, k)]
    for j in range(1, n):
        sched.append((float(t[j - 1]), (n - j) * k / n))
    sched.append((float(t[-1]), k / n))
    return sched


def schedule_rate(schedule, tau: float) -> float:
    rate = schedule[0][1]
    for tb, r in schedule:
        if tau >= tb:
            rate = r
        else:
            break
    return rate


def cluster_reactive(cluster) -> float:
    """Total clearance-time reactive power of ``(alpha, iq)`` members."""
    return float(math.fsum(a * iq for a, iq in cluster))


def _alpha_roots(q_equ: float, n_c: int, params: TurbineParams) -> tuple[float, float]:
    if q_equ < 0 or n_c < 1:
        raise InputDomainError("need q_equ >= 0 and n_c >= 1")
    hi = params.lvrt_upper
    disc = hi * hi - 4.0 * q_equ / (params.lvrt_gain * params.i_n * n_c)
    if disc < 0:
        raise InfeasibleEquivalentError(
            f"reactive power {q_equ} exceeds the LVRT capability of {n_c} machines"
        )
    s = math.sqrt(disc)
    return (hi + s) / 2.0, (hi - s) / 2.0


def equivalent_terminal_voltage(q_equ: float, n_c: int, alpha_pcc: float, params: TurbineParams) -> float:
    """Terminal voltage at which ``n_c`` machines supply ``q_equ``; of the two
    roots, the one nearer ``alpha_pcc`` (ties go to the larger root)."""
    r1, r2 = _alpha_roots(q_equ, n_c, params)
    return r1 if abs(r1 - alpha_pcc) <= abs(r2 - alpha_pcc) else r2


def equivalent_power_at_clearance(unit: EquivalentUnit, params: TurbineParams, e0: float = 1.0) -> float:
    """Active power of a unit just before clearance.

    Categories I/II sit on their active-current limit; category III keeps
    delivering its pre-fault current, ``n f(v_eq) / e0``.
    """
    if unit.category in (Category.I, Category.II):
        a = unit.alpha_equ
        return unit.n_machines * a * id_max(a, params)
    return unit.n_machines * power_curve(unit.v_eq, params) / e0


def equivalent_line(p_equ: float, q_equ: float, alpha_equ: float, alpha_pcc: float, k0: float) -> tuple[float, float]:
    """Series line (r, x) with ``r = k0 x`` dropping ``alpha_equ`` to ``alpha_pcc``.

    Of the two roots, the shorter line keeps the angle across it below
    90 degrees.  The closed form is rearranged to avoid cancellation when the
    drop is small.
    """
    if alpha_equ < alpha_pcc:
        raise InputDomainError(f"alpha_equ={alpha_equ} below alpha_pcc={alpha_pcc}")
    if p_equ * p_equ + q_equ * q_equ <= 0:
        raise InputDomainError("equivalent line needs a nonzero power flow")
    delta = alpha_equ**2 - alpha_pcc**2
    if delta == 0:
        return 0.0, 0.0
    A = alpha_equ * (k0 * p_equ + q_equ)
    B = (p_equ**2 + q_equ**2) * (1 + k0**2)
    disc = A * A - B * delta
    if disc < 0 or A + math.sqrt(disc) <= 0:
        raise InfeasibleEquivalentError(
            f"no feasible line for P={p_equ}, Q={q_equ}, alpha_equ={alpha_equ}, alpha_pcc={alpha_pcc}, k0={k0}"
        )
    x = alpha_equ * delta / (A + math.sqrt(disc))
    return k0 * x, x


def line_drop(p: float, q: float, alpha_equ: float, r: float, x: float) -> complex:
    """PCC voltage phasor seen through line ``r + jx`` from a unit at ``alpha_equ``
    delivering ``p + jq``."""
    return alpha_equ - complex(r, x) * complex(p, -q) / alpha_equ


def _feeder_ratios(farm: FarmTopology) -> list[float]:
    out = []
    for f in farm.feeders:
        z = sum(complex(b[2]) for b in f.branches)
        out.extend([z.real / z.imag if z.imag != 0 else 0.0] * f.n_turbines)
    return out


def build_equivalent_farm(
    farm: FarmTopology,
    speeds,
    alpha_pcc: float,
    terminal_voltages,
    e0s=None,
) -> EquivalentFarm:
    """Classify every turbine and size one equivalent unit per non-empty category.

    ``terminal_voltages`` are the clearance-time voltages solved for
    ``alpha_pcc``; ``e0s`` the pre-fault terminal voltages (unity if omitted).
    """
    params = farm.params
    speeds = np.asarray(speeds, dtype=float)
    n = farm.n_turbines
    if speeds.shape != (n,):
        raise InputDomainError(f"expected {n} wind speeds, got {speeds.shape}")
    alphas = np.abs(np.asarray(terminal_voltages))
    e0s = np.ones(n) if e0s is None else np.asarray(e0s, dtype=float)
    p0s = power_curve(speeds, params)
    i_d0s = p0s / e0s
    ratios = np.asarray(_feeder_ratios(farm))

    cats = [classify_wtg(v, min(a, 1.0), e, params).category for v, a, e in zip(speeds, alphas, e0s)]
    notes = []
    units = []
    for cat in Category:
        idx = [i for i in range(n) if cats[i] == cat]
        if not idx:
            continue
        nc = len(idx)
        a_m = alphas[idx]
        v_eq = equivalent_wind_speed(speeds[idx], params)
        iqs = [iq_ref(a, params) for a in a_m]
        q_equ = cluster_reactive(zip(a_m, iqs))
        # clearance-time active power of each member under the quasi-static law
        p_m = np.array([a * id_ref(CurrentState(i_d0s[i], 0.0, i_d0s[i], e0s[i]), a, params) for i, a in zip(idx, a_m)])
        if q_equ > 0:
            a_eq = equivalent_terminal_voltage(q_equ, nc, alpha_pcc, params)
            if a_eq < alpha_pcc:
                r1, r2 = _alpha_roots(q_equ, nc, params)
                alt = r2 if a_eq == r1 else r1
                if alt >= alpha_pcc:
                    notes.append(f"category {cat.name}: nearer root {a_eq:.6f} below PCC voltage, using {alt:.6f}")
                    a_eq = alt
        else:
            a_eq = float(np.mean(a_m))
        unit = EquivalentUnit(cat, nc, v_eq, q_equ=q_equ, alpha_equ=a_eq, members=list(idx))
        if cat is Category.III:
            e_eff = float(np.sum(p0s[idx]) / np.sum(p_m)) if np.sum(p_m) > 0 else 1.0
            unit.p_equ = equivalent_power_at_clearance(unit, params, e0=e_eff)
        else:
            unit.p_equ = equivalent_power_at_clearance(unit, params)
        if cat is Category.I:
            durs = ramp_durations(zip(speeds[idx], a_m), e0s[idx], params)
            unit.ramp_schedule = klim_schedule(durs, params)

        w = np.array([abs(p + 1j * q) for p, q in zip(p_m, np.asarray(a_m) * np.asarray(iqs))])
        k0 = float(np.average(ratios[idx], weights=w)) if w.sum() > 0 else float(np.mean(ratios[idx]))
        if abs(a_eq - alpha_pcc) <= 1e-12 or unit.p_equ**2 + q_equ**2 == 0:
            r, x = 0.0, 0.0
        else:
            r, x = equivalent_line(unit.p_equ, q_equ, a_eq, alpha_pcc, k0)
        unit.line_r, unit.line_x = r, x
        units.append(unit)

    return EquivalentFarm(units, float(alpha_pcc), params, farm.pcc_transformer_z, farm.grid_thevenin_z, notes)


def traditional_equivalent(farm: FarmTopology, speeds) -> EquivalentFarm:
    """Wind-speed-only single-machine baseline.

    One unit for the whole farm at the farm-wide equivalent speed, plain
    ramp rate, and a line equal to the mean turbine-to-PCC path impedance
    shared by all machines in parallel.
    """
    params = farm.params
    paths = np.concatenate([np.diag(path_impedance_matrix(f)) for f in farm.feeders])
    n = farm.n_turbines
    z = complex(np.mean(paths)) / n
    unit = EquivalentUnit(
        None, n, equivalent_wind_speed(speeds, params), [(0.0, params.k_ramp)],
        line_r=z.real, line_x=z.imag, members=list(range(n)),
    )
    return EquivalentFarm([unit], float("nan"), params, farm.pcc_transformer_z, farm.grid_thevenin_z,
                          ["traditional wind-speed-only baseline"])


@dataclass
class PccIterationResult:
    farm: EquivalentFarm
    trace: list  # alpha_pcc fed to each pass followed by the final simulated value
    terminal_voltages: np.ndarray
    e0s: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


def pcc_iteration(farm: FarmTopology, speeds, scenario, tol: float = 1e-3, max_iter: int = 10,
                  terminal_tol: float = 1e-6, terminal_max_iter: int = 50,
                  unity_prefault: bool = False) -> PccIterationResult:
    """Find the PCC voltage just before clearance by simulating successive equivalents.

    Starts from ``alpha_pcc = 1``; each pass solves the terminal voltages,
    builds the equivalent farm, simulates ``scenario`` on it and reads the
    PCC voltage at the last pre-clearance sample.  Classification is redone
    from scratch every pass.
    """
    from .simulate import prefault_state, run

    if tol <= 0:
        raise ValueError("tol must be positive")
    speeds = np.asarray(speeds, dtype=float)
    pre = prefault_state(farm, speeds, scenario)
    e0s = np.ones(farm.n_turbines) if unity_prefault else pre.e0
    i_d0s = power_curve(speeds, farm.params) / e0s
    alpha = 1.0
    trace = [alpha]
    for _ in range(max_iter):
        sol = solve_terminal_voltages(complex(alpha), farm, i_d0s, tol=terminal_tol, max_iter=terminal_max_iter, e0s=e0s)
        eq = build_equivalent_farm(farm, speeds, alpha, sol.voltages, e0s)
        ts = run(eq, None, scenario)
        alpha_new = float(ts.u_pcc[scenario.clear_index - 1])
        trace.append(alpha_new)
        if abs(alpha_new - alpha) < tol:
            sol = solve_terminal_voltages(complex(alpha_new), farm, i_d0s, tol=terminal_tol,
                                          max_iter=terminal_max_iter, e0s=e0s)
            eq = build_equivalent_farm(farm, speeds, alpha_new, sol.voltages, e0s)
            return PccIterationResult(eq, trace, sol.voltages, e0s)
        alpha = alpha_new
    raise NonConvergenceError(f"PCC iteration did not converge in {max_iter} passes",
                              residual=abs(trace[-1] - trace[-2]), trace=trace)
