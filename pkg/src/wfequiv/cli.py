"""Command-line entry point.

Subcommands: ``classify``, ``boundary``, ``simulate``, ``compare`` and
``equivalize``.  Exit codes: 0 success, 2 invalid scenario or input,
3 solver non-convergence, 4 infeasible equivalencing.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .aggregate import pcc_iteration, traditional_equivalent
from .classify import Category, boundary_table, write_boundary_csv
from .errors import InfeasibleEquivalentError, InputDomainError, NonConvergenceError, SchemaError
from .scenario import Scenario
from .simulate import TimeSeries, compare, run

log = logging.getLogger("wfequiv")

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_INFEASIBLE = 0, 2, 3, 4


def _out_dir(args, sc: Scenario) -> Path:
    d = Path(args.out_dir if args.out_dir else sc.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _iterate(sc: Scenario):
    s = sc.solver
    return pcc_iteration(sc.farm, sc.turbine_speeds(), sc.fault, tol=s.pcc_tol, max_iter=s.pcc_max_iter,
                         terminal_tol=s.terminal_tol, terminal_max_iter=s.terminal_max_iter,
                         unity_prefault=s.unity_prefault_voltage)


def subgroup_lines(categories) -> list[str]:
    """Subgroup membership in 1-based turbine numbers, ``--`` when empty."""
    lines = []
    for cat in Category:
        ids = [str(i + 1) for i, c in enumerate(categories) if c == cat]
        lines.append(f"Subgroup {int(cat)}: {', '.join(ids) if ids else '--'}")
    return lines


def cmd_classify(path: str, args) -> list[str]:
    sc = Scenario.load(path)
    res = _iterate(sc)
    speeds = sc.turbine_speeds()
    cats = [None] * sc.farm.n_turbines
    for u in res.farm.units:
        for i in u.members:
            cats[i] = u.category
    out = _out_dir(args, sc)
    stem = Path(path).stem
    alphas = np.abs(res.terminal_voltages)
    with open(out / f"{stem}_clusters.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "v_w", "alpha", "category"])
        for i, (v, a, c) in enumerate(zip(speeds, alphas, cats)):
            w.writerow([i + 1, f"{v:.12g}", f"{a:.12g}", c.name])
    lines = [f"PCC voltage trace: {' -> '.join(f'{a:.4f}' for a in res.trace)}"] + subgroup_lines(cats)
    (out / f"{stem}_subgroups.txt").write_text("\n".join(lines) + "\n")
    return lines


def cmd_boundary(path: str, args) -> list[str]:
    sc = Scenario.load(path)
    grid = parse_alpha_grid(args.alpha_grid)
    rows = boundary_table(grid, args.e, sc.farm.params)
    out = _out_dir(args, sc) / f"{Path(path).stem}_boundary.csv"
    write_boundary_csv(rows, out)
    return [f"wrote {len(rows)} rows to {out}"]


def cmd_simulate(path: str, args) -> list[str]:
    sc = Scenario.load(path)
    speeds = sc.turbine_speeds()
    s = sc.solver
    if args.model == "detailed":
        model = sc.farm
    elif args.model == "equivalent":
        model = _iterate(sc).farm
    else:
        model = traditional_equivalent(sc.farm, speeds)
    ts = run(model, speeds, sc.fault, tol=s.network_tol, max_iter=s.network_max_iter)
    out = _out_dir(args, sc) / f"{Path(path).stem}_{args.model}.csv"
    ts.to_csv(out)
    out.with_suffix(".meta.json").write_text(json.dumps({"wall_time": ts.wall_time, "model": args.model}) + "\n")
    return [f"wrote {len(ts.t)} samples to {out} ({ts.wall_time:.3f} s)"]


def cmd_equivalize(path: str, args) -> list[str]:
    sc = Scenario.load(path)
    res = _iterate(sc)
    out = _out_dir(args, sc) / f"{Path(path).stem}_equivalent.json"
    res.farm.to_json(out)
    return [f"wrote {len(res.farm.units)} units to {out}"]


def _load_series(path: str) -> TimeSeries:
    ts = TimeSeries.from_csv(path)
    meta = Path(path).with_suffix(".meta.json")
    if meta.exists():
        ts.wall_time = float(json.loads(meta.read_text())["wall_time"])
    return ts


def cmd_compare(args) -> dict:
    a, b = _load_series(args.a), _load_series(args.b)
    metrics = compare(a, b, tuple(args.window) if args.window else None)
    text = json.dumps(metrics, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return metrics


def parse_alpha_grid(text: str) -> list[float]:
    """``"0.2:0.9:15"`` (start:stop:count) or a comma list."""
    if ":" in text:
        a, b, n = text.split(":")
        return list(np.linspace(float(a), float(b), int(n)))
    return [float(x) for x in text.split(",") if x.strip()]


_COMMANDS = {"classify": cmd_classify, "boundary": cmd_boundary, "simulate": cmd_simulate, "equivalize": cmd_equivalize}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, InfeasibleEquivalentError):
        return EXIT_INFEASIBLE
    if isinstance(exc, NonConvergenceError):
        return EXIT_SOLVER
    if isinstance(exc, (SchemaError, InputDomainError, OSError)):
        return EXIT_SCHEMA
    raise exc


def _one(cmd: str, path: str, args) -> tuple[int, list[str]]:
    try:
        return EXIT_OK, _COMMANDS[cmd](path, args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes, re-raised otherwise
        return _exit_code(exc), [f"{path}: {type(exc).__name__}: {exc}"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wfequiv", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scen(sp):
        sp.add_argument("scenario", nargs="+", help="scenario JSON file(s)")
        sp.add_argument("-o", "--out-dir", help="output directory (default: the scenario's outputs.dir)")
        sp.add_argument("-j", "--jobs", type=int, default=1, help="scenarios processed concurrently")
        return sp

    scen(sub.add_parser("classify", help="cluster turbines for the scenario's fault"))
    b = scen(sub.add_parser("boundary", help="critical wind speeds over a voltage grid"))
    b.add_argument("--alpha-grid", default="0.2:0.9:15")
    b.add_argument("--e", type=float, default=1.0, help="pre-fault terminal voltage")
    s = scen(sub.add_parser("simulate", help="time-domain run of one model"))
    s.add_argument("--model", choices=["detailed", "equivalent", "traditional"], default="detailed")
    scen(sub.add_parser("equivalize", help="write the equivalent farm as JSON"))
    c = sub.add_parser("compare", help="error metrics of series A against reference B")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"))
    c.add_argument("--out", help="also write the metrics JSON here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "compare":
        try:
            cmd_compare(args)
            return EXIT_OK
        except Exception as exc:  # noqa: BLE001
            code = _exit_code(exc)
            print(f"compare: {exc}", file=sys.stderr)
            return code

    paths = args.scenario
    if args.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_one, [args.command] * len(paths), paths, [args] * len(paths)))
    else:
        results = [_one(args.command, p, args) for p in paths]
    worst = EXIT_OK
    for code, lines in results:
        stream = sys.stdout if code == EXIT_OK else sys.stderr
        for line in lines:
            print(line, file=stream)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
