"""Critical wind speeds against fault-clearance voltage, as CSV and a plot.

    python scripts/boundary_figure.py --out results
"""
import argparse
from pathlib import Path

import numpy as np

from wfequiv.classify import boundary_table, write_boundary_csv
from wfequiv.wtg_control import TurbineParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--e", type=float, default=1.0, help="pre-fault terminal voltage")
    ap.add_argument("--points", type=int, default=141)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    params = TurbineParams()
    alphas = np.linspace(params.lvrt_lower, params.lvrt_upper, args.points)
    rows = boundary_table(alphas, args.e, params)
    write_boundary_csv(rows, out / "boundary.csv")

    try:
        import matplotlib
    except ImportError:
        print("matplotlib not installed; wrote boundary.csv only")
        return
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    v1 = np.array([r.v_cri1 for r in rows])
    v2 = np.array([r.v_cri2 for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(alphas, v1, label="I / II boundary")
    ax.plot(alphas, v2, label="II / III boundary")
    ax.fill_between(alphas, v1, params.v_rated, alpha=0.2, label="I: ramped recovery")
    ax.fill_between(alphas, v2, v1, alpha=0.2, label="II: limited, instant recovery")
    ax.fill_between(alphas, params.v_cutin, v2, alpha=0.2, label="III: unaffected")
    ax.set_xlabel("terminal voltage before clearance (pu)")
    ax.set_ylabel("wind speed (m/s)")
    ax.set_ylim(params.v_cutin, params.v_rated)
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(out / "boundary.png", dpi=150)
    print(f"wrote {out / 'boundary.csv'} and {out / 'boundary.png'}")


if __name__ == "__main__":
    main()
