"""Deep and shallow fault case study: PCC iteration trace, clustering, and
accuracy/timing of the proposed and traditional equivalents.

    python scripts/run_case_study.py --out results
"""
import argparse
import json
from pathlib import Path

import numpy as np

from wfequiv.aggregate import pcc_iteration, traditional_equivalent
from wfequiv.cases import case_deep, case_full, case_shallow
from wfequiv.cli import subgroup_lines
from wfequiv.simulate import compare, run

CASES = {"deep": case_deep, "shallow": case_shallow, "full": case_full}


def best_time(model, speeds, fault, repeats):
    return min(run(model, speeds, fault).wall_time for _ in range(repeats))


def study(name, sc, out: Path, repeats: int) -> dict:
    speeds = sc.turbine_speeds()
    fault = sc.fault
    res = pcc_iteration(sc.farm, speeds, fault)
    cats = [None] * sc.farm.n_turbines
    for u in res.farm.units:
        for i in u.members:
            cats[i] = u.category

    det = run(sc.farm, speeds, fault)
    eq = run(res.farm, None, fault)
    trad_model = traditional_equivalent(sc.farm, speeds)
    trad = run(trad_model, None, fault)
    window = (fault.t_fault, fault.t_end)

    t_det = best_time(sc.farm, speeds, fault, repeats)
    t_eq = best_time(res.farm, None, fault, repeats)
    t_trad = best_time(trad_model, None, fault, repeats)

    for label, ts in (("detailed", det), ("equivalent", eq), ("traditional", trad)):
        ts.to_csv(out / f"{name}_{label}.csv")
    res.farm.to_json(out / f"{name}_equivalent.json")

    row = {
        "case": name,
        "turbines": sc.farm.n_turbines,
        "pcc_trace": [round(a, 4) for a in res.trace],
        "subgroups": subgroup_lines(cats),
        "mape_proposed_pct": compare(eq, det, window)["mape_pct"],
        "mape_traditional_pct": compare(trad, det, window)["mape_pct"],
        "time_detailed_s": t_det,
        "time_equivalent_s": t_eq,
        "time_traditional_s": t_trad,
    }
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", nargs="+", choices=sorted(CASES), default=["deep", "shallow", "full"])
    ap.add_argument("--out", default="results")
    ap.add_argument("--repeats", type=int, default=3, help="timing repetitions (best of)")
    ap.add_argument("--write-scenarios", action="store_true", help="also save the scenario JSON files")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in args.cases:
        sc = CASES[name]()
        if args.write_scenarios:
            sc.save(out / f"{name}.json")
        rows.append(study(name, sc, out, args.repeats))

    for r in rows:
        print(f"\n== {r['case']} ({r['turbines']} turbines) ==")
        print("PCC voltage per pass: " + " -> ".join(f"{a:.4f}" for a in r["pcc_trace"]))
        print("\n".join(r["subgroups"]))
    print(f"\n{'case':8s} {'MAPE prop %':>12s} {'MAPE trad %':>12s} {'t det ms':>9s} {'t eq ms':>8s} {'ratio':>6s}")
    for r in rows:
        print(f"{r['case']:8s} {r['mape_proposed_pct']:12.3f} {r['mape_traditional_pct']:12.3f} "
              f"{1e3 * r['time_detailed_s']:9.2f} {1e3 * r['time_equivalent_s']:8.2f} "
              f"{r['time_detailed_s'] / r['time_equivalent_s']:6.0f}")
    (out / "summary.json").write_text(json.dumps(rows, indent=2, default=float) + "\n")


if __name__ == "__main__":
    main()
