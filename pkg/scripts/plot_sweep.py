"""Log-log regret-vs-T plot from one or more sweep.csv files.

Any plotting tool works on the tidy CSV; this is the matplotlib version.

    python3 scripts/plot_sweep.py out/cone_gauss_sweep/sweep.csv --bound -o regret.png
"""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cautious_bandits.cli import read_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("sweeps", nargs="+", type=Path)
    p.add_argument("--bound", action="store_true", help="also draw the explicit bound")
    p.add_argument("-o", "--output", default="regret_vs_T.png")
    args = p.parse_args()

    fig, ax = plt.subplots(figsize=(5, 4))
    for path in args.sweeps:
        rows = read_csv(path)
        T = np.array([float(r["T"]) for r in rows])
        mean = np.array([float(r["mean_regret"]) for r in rows])
        se = np.array([float(r["stderr"]) for r in rows])
        label = path.parent.name
        fit_path = path.parent / "fit.json"
        if fit_path.exists():
            fit = json.loads(fit_path.read_text())
            if fit:
                label += f" (slope {fit['slope']:.2f})"
        ax.errorbar(T, mean, yerr=2 * se, marker="o", capsize=2, label=label)
        if args.bound:
            ax.plot(T, [float(r["bound_total"]) for r in rows], "--", color="gray", label=f"{path.parent.name} bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("mean cumulative regret")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
