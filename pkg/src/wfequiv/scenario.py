"""Scenario files: one JSON document describing turbine, wind, topology,
fault, solver settings and output location.

Documents are validated against :data:`SCHEMA` (unknown keys rejected)
before anything is built.  Radial-generator topologies are expanded on load,
so a saved scenario always lists explicit feeders and reloads identically.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import jsonschema
import numpy as np

from .errors import SchemaError, WindFarmError
from .feeder_solver import FarmTopology, Feeder, build_incidence, radial_farm
from .simulate import FaultScenario
from .wake import WakeParams, draw_inflow, farm_speeds
from .wtg_control import TurbineParams

_num = {"type": "number"}
_z = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_zn = {"anyOf": [_z, {"type": "null"}]}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "turbine": _obj({k: _num for k in TurbineParams.__dataclass_fields__}),
        "wake": _obj(
            {
                "c_t": _num, "k_decay": _num, "rotor_radius": _num, "spacing": _num,
                "seed": {"type": "integer"},
                "inflow_range": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "speeds": {"type": "array", "items": {"type": "array", "items": _num}},
            }
        ),
        "topology": {
            "oneOf": [
                _obj(
                    {
                        "feeders": {
                            "type": "array", "minItems": 1,
                            "items": _obj(
                                {
                                    "branches": {
                                        "type": "array", "minItems": 1,
                                        "items": {
                                            "type": "array", "minItems": 3, "maxItems": 3,
                                            "prefixItems": [{"type": "integer"}, {"type": "integer"}, _z],
                                        },
                                    },
                                    "turbine_nodes": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                                },
                                required=("branches", "turbine_nodes"),
                            ),
                        },
                        "pcc_transformer_z": _z,
                        "grid_thevenin_z": _z,
                    },
                    required=("feeders",),
                ),
                _obj(
                    {
                        "radial": _obj(
                            {
                                "turbines_per_feeder": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                                "spacing_km": _num, "feeder_length_km": _num,
                                "z_per_km_ohm": _z, "base_kv": _num, "base_mva": _num,
                            },
                            required=("turbines_per_feeder",),
                        ),
                        "pcc_transformer_z": _z,
                        "grid_thevenin_z": _z,
                    },
                    required=("radial",),
                ),
            ]
        },
        "fault": _obj(
            {
                "e_source_prefault": _num, "e_source_fault": _num, "t_fault": _num, "t_clear": _num,
                "t_end": _num, "dt": _num, "grid_thevenin_z": _zn, "fault_impedance": _zn,
            }
        ),
        "solver": _obj(
            {
                "terminal_tol": _num, "terminal_max_iter": {"type": "integer"},
                "pcc_tol": _num, "pcc_max_iter": {"type": "integer"},
                "network_tol": _num, "network_max_iter": {"type": "integer"},
                "unity_prefault_voltage": {"type": "boolean"},
            }
        ),
        "outputs": _obj({"dir": {"type": "string"}}),
    },
    required=("topology", "fault"),
)


@dataclass(frozen=True)
class SolverSettings:
    terminal_tol: float = 1e-6
    terminal_max_iter: int = 50
    pcc_tol: float = 1e-3
    pcc_max_iter: int = 10
    network_tol: float = 1e-11
    network_max_iter: int = 200
    unity_prefault_voltage: bool = False


@dataclass
class Scenario:
    farm: FarmTopology
    fault: FaultScenario
    wake: WakeParams = field(default_factory=WakeParams)
    seed: int = 0
    inflow_range: tuple = (9.0, 11.0)
    speeds: list | None = None  # explicit per-feeder speeds override the wake draw
    solver: SolverSettings = field(default_factory=SolverSettings)
    output_dir: str = "out"

    def turbine_speeds(self) -> np.ndarray:
        counts = [f.n_turbines for f in self.farm.feeders]
        if self.speeds is not None:
            if [len(s) for s in self.speeds] != counts:
                raise SchemaError("explicit speeds must list one value per turbine on every feeder")
            return np.array([v for s in self.speeds for v in s], dtype=float)
        inflow = draw_inflow(self.seed, len(counts), *self.inflow_range)
        return np.array(farm_speeds(inflow, counts, self.wake))

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        def z(c):
            return [complex(c).real, complex(c).imag]

        wake = asdict(self.wake)
        wake["inflow_range"] = list(self.inflow_range)
        wake["seed"] = self.seed
        if self.speeds is not None:
            wake["speeds"] = [list(s) for s in self.speeds]
        fault = asdict(self.fault)
        fault["grid_thevenin_z"] = None if self.fault.grid_thevenin_z is None else z(self.fault.grid_thevenin_z)
        fault["fault_impedance"] = None if self.fault.fault_impedance is None else z(self.fault.fault_impedance)
        return {
            "turbine": asdict(self.farm.params),
            "wake": wake,
            "topology": {
                "feeders": [
                    {"branches": [[a, b, z(zz)] for a, b, zz in f.branches], "turbine_nodes": list(f.turbine_nodes)}
                    for f in self.farm.feeders
                ],
                "pcc_transformer_z": z(self.farm.pcc_transformer_z),
                "grid_thevenin_z": z(self.farm.grid_thevenin_z),
            },
            "fault": fault,
            "solver": asdict(self.solver),
            "outputs": {"dir": self.output_dir},
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise SchemaError(f"scenario invalid at {path}: {exc.message}") from None
        try:
            return cls._build(doc)
        except WindFarmError as exc:
            raise SchemaError(str(exc)) from exc

    @classmethod
    def _build(cls, doc: dict) -> "Scenario":
        params = TurbineParams(**doc.get("turbine", {}))
        topo = doc["topology"]
        pcc_z = complex(*topo.get("pcc_transformer_z", [0.0, 0.0]))
        grid_z = complex(*topo.get("grid_thevenin_z", [0.0, 0.0]))
        if "radial" in topo:
            r = dict(topo["radial"])
            if "z_per_km_ohm" in r:
                r["z_per_km_ohm"] = complex(*r["z_per_km_ohm"])
            farm = radial_farm(pcc_transformer_z=pcc_z, grid_thevenin_z=grid_z, params=params, **r)
        else:
            feeders = [
                Feeder([(int(a), int(b), complex(*zz)) for a, b, zz in f["branches"]], [int(n) for n in f["turbine_nodes"]])
                for f in topo["feeders"]
            ]
            farm = FarmTopology(feeders, pcc_z, grid_z, params)
        for f in farm.feeders:
            if any(complex(b[2]).real < 0 for b in f.branches):
                raise SchemaError("branch resistance must be non-negative")
        for f in farm.feeders:
            build_incidence(f)

        wake_doc = dict(doc.get("wake", {}))
        seed = wake_doc.pop("seed", 0)
        inflow = tuple(wake_doc.pop("inflow_range", (9.0, 11.0)))
        speeds = wake_doc.pop("speeds", None)
        fault_doc = dict(doc["fault"])
        for key in ("grid_thevenin_z", "fault_impedance"):
            if fault_doc.get(key) is not None:
                fault_doc[key] = complex(*fault_doc[key])
        sc = cls(
            farm=farm,
            fault=FaultScenario(**fault_doc),
            wake=WakeParams(**wake_doc),
            seed=seed,
            inflow_range=inflow,
            speeds=speeds,
            solver=SolverSettings(**doc.get("solver", {})),
            output_dir=doc.get("outputs", {}).get("dir", "out"),
        )
        sc.turbine_speeds()
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(doc)
