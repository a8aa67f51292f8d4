"""Terminal voltages of a radial collector network for a given PCC voltage.

Each feeder is solved by the branch-node fixed point ``U' = U_pcc + C^T Z C I(U)``
where ``C`` marks which branches carry each node's injection.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergenceError, TopologyError
from .wtg_control import TurbineParams, _id_ref, _iq_ref, VOLTAGE_FLOOR


@dataclass(frozen=True)
class Feeder:
    branches: list  # (from_node, to_node, z) with node 0 the PCC-side root
    turbine_nodes: list

    @property
    def n_turbines(self) -> int:
        return len(self.turbine_nodes)


@dataclass(frozen=True)
class FarmTopology:
    feeders: list
    pcc_transformer_z: complex = 0j
    grid_thevenin_z: complex = 0j
    params: TurbineParams = field(default_factory=TurbineParams)

    @property
    def n_turbines(self) -> int:
        return sum(f.n_turbines for f in self.feeders)

    def feeder_slices(self) -> list[slice]:
        out, start = [], 0
        for f in self.feeders:
            out.append(slice(start, start + f.n_turbines))
            start += f.n_turbines
        return out


@dataclass(frozen=True)
class IncidenceMatrix:
    matrix: np.ndarray  # rows = branches, cols = nodes
    nodes: list
    z: np.ndarray  # branch impedances in row order

    def columns(self, node_ids) -> np.ndarray:
        idx = [self.nodes.index(n) for n in node_ids]
        return self.matrix[:, idx]


def build_incidence(feeder: Feeder) -> IncidenceMatrix:
    branches = list(feeder.branches)
    adj: dict = {}
    for b, (a, c, _) in enumerate(branches):
        if a == c:
            raise TopologyError(f"branch {b} is a self-loop")
        adj.setdefault(a, []).append((c, b))
        adj.setdefault(c, []).append((a, b))
    if 0 not in adj:
        raise TopologyError("feeder has no branch at the root node 0")
    nodes = sorted(n for n in adj if n != 0)
    if len(branches) != len(nodes):
        raise TopologyError("feeder is not radial: branch count must equal node count")

    parent: dict = {0: None}
    parent_branch: dict = {}
    queue = deque([0])
    while queue:
        n = queue.popleft()
        for m, b in adj[n]:
            if m in parent:
                if parent_branch.get(n) != b:
                    raise TopologyError("feeder contains a loop")
                continue
            parent[m] = n
            parent_branch[m] = b
            queue.append(m)
    if len(parent) != len(nodes) + 1:
        raise TopologyError("feeder is not connected")
    for n in feeder.turbine_nodes:
        if n not in parent or n == 0:
            raise TopologyError(f"turbine node {n} is not a feeder node")

    C = np.zeros((len(branches), len(nodes)), dtype=int)
    for j, n in enumerate(nodes):
        m = n
        while m != 0:
            C[parent_branch[m], j] = 1
            m = parent[m]
    z = np.array([complex(b[2]) for b in branches])
    return IncidenceMatrix(C, nodes, z)


def path_impedance_matrix(feeder: Feeder, inc: IncidenceMatrix | None = None) -> np.ndarray:
    """``C^T Z C`` restricted to the turbine nodes, in ``turbine_nodes`` order."""
    inc = inc or build_incidence(feeder)
    Ct = inc.columns(feeder.turbine_nodes)
    return Ct.T @ (inc.z[:, None] * Ct)


def injection_current(u: complex, i_d0: float, params: TurbineParams, e0: float = 1.0) -> complex:
    """Current a turbine injects at terminal voltage ``u`` once its dq currents settle."""
    return complex(_injections(np.array([u]), np.array([i_d0]), np.array([e0]), params)[0])


def _injections(u: np.ndarray, i_d0: np.ndarray, e0: np.ndarray, params: TurbineParams) -> np.ndarray:
    law = params.law()
    out = np.empty(u.shape, dtype=complex)
    for k, uk in enumerate(u):
        mag = abs(uk)
        m = max(mag, VOLTAGE_FLOOR)
        p = m * _id_ref(i_d0[k], e0[k], m, *law)
        q = m * _iq_ref(m, *law)
        ph = uk / mag if mag > 0 else 1.0
        out[k] = np.conj((p + 1j * q) / (m * ph))
    return out


def sweep(u_pcc: complex, u_prev, feeder: Feeder, i_d0s, params: TurbineParams, e0s=None, zpath=None):
    """One fixed-point update of the turbine voltages on ``feeder``."""
    u_prev = np.asarray(u_prev, dtype=complex)
    i_d0s = np.asarray(i_d0s, dtype=float)
    e0s = np.ones_like(i_d0s) if e0s is None else np.asarray(e0s, dtype=float)
    if zpath is None:
        zpath = path_impedance_matrix(feeder)
    return u_pcc + zpath @ _injections(u_prev, i_d0s, e0s, params)


@dataclass
class TerminalSolution:
    voltages: np.ndarray
    iterations: int
    residual: float
    damped: bool = False


def _solve_feeder(u_pcc, feeder, i_d0s, e0s, params, tol, max_iter):
    zpath = path_impedance_matrix(feeder)
    u = np.full(feeder.n_turbines, u_pcc, dtype=complex)
    history = []
    growth = 0
    relax = 1.0
    for it in range(1, max_iter + 1):
        u_new = sweep(u_pcc, u, feeder, i_d0s, params, e0s, zpath)
        res = float(np.max(np.abs(u_new - u))) if u.size else 0.0
        if history and res > history[-1]:
            growth += 1
        else:
            growth = 0
        if growth >= 3:
            relax = 0.5
        history.append(res)
        u = u_new if relax == 1.0 else u + relax * (u_new - u)
        if res < tol:
            return u, it, res, relax != 1.0
    raise NonConvergenceError(
        f"terminal-voltage sweep did not converge in {max_iter} iterations", residual=history[-1], trace=history
    )


def solve_terminal_voltages(
    u_pcc: complex,
    farm: FarmTopology,
    i_d0s,
    tol: float = 1e-6,
    max_iter: int = 50,
    e0s=None,
) -> TerminalSolution:
    """Solve every turbine's terminal voltage with the PCC held at ``u_pcc``.

    Feeders are independent given the PCC voltage.  The iteration count is
    the largest over feeders.  If the update norm grows three times in a row
    the remaining updates are relaxed by one half and ``damped`` is set.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    i_d0s = np.asarray(i_d0s, dtype=float)
    e0s = np.ones_like(i_d0s) if e0s is None else np.asarray(e0s, dtype=float)
    out = np.empty(farm.n_turbines, dtype=complex)
    iters, worst, damped = 0, 0.0, False
    for f, sl in zip(farm.feeders, farm.feeder_slices()):
        u, it, res, d = _solve_feeder(complex(u_pcc), f, i_d0s[sl], e0s[sl], farm.params, tol, max_iter)
        out[sl] = u
        iters, worst, damped = max(iters, it), max(worst, res), damped or d
    return TerminalSolution(out, iters, worst, damped)


def write_voltages_csv(voltages, path, node_ids=None) -> None:
    voltages = np.asarray(voltages, dtype=complex)
    ids = node_ids if node_ids is not None else range(1, len(voltages) + 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "u_mag", "u_angle"])
        for n, u in zip(ids, voltages):
            w.writerow([n, f"{abs(u):.15g}", f"{np.angle(u):.15g}"])


# -- farm construction helpers --------------------------------------------

def ohm_to_pu(z_ohm: complex, base_kv: float, base_mva: float) -> complex:
    return complex(z_ohm) / (base_kv**2 / base_mva)


def radial_farm(
    turbines_per_feeder,
    spacing_km: float = 0.5,
    feeder_length_km: float = 2.0,
    z_per_km_ohm: complex = 0.08 + 0.16j,
    base_kv: float = 35.0,
    base_mva: float = 1.5,
    pcc_transformer_z: complex = 0j,
    grid_thevenin_z: complex = 0j,
    params: TurbineParams | None = None,
) -> FarmTopology:
    """Chain feeders: a ``feeder_length_km`` run to the first turbine, then
    ``spacing_km`` between neighbours.  Impedances go to per-unit on the
    single-machine base ``base_mva``."""
    z_km = ohm_to_pu(z_per_km_ohm, base_kv, base_mva)
    feeders = []
    for n in turbines_per_feeder:
        branches = [(0, 1, z_km * feeder_length_km)]
        branches += [(i, i + 1, z_km * spacing_km) for i in range(1, n)]
        feeders.append(Feeder(branches, list(range(1, n + 1))))
    return FarmTopology(feeders, complex(pcc_transformer_z), complex(grid_thevenin_z), params or TurbineParams())
