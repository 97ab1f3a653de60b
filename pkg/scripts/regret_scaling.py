"""Regret-vs-horizon sweep with scaling fit and bound dominance table.

    python3 scripts/regret_scaling.py --config configs/cone_gauss_sweep.yaml --out out/scaling
"""

import argparse
from pathlib import Path

from cautious_bandits import cli
from cautious_bandits.config import load_config


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default="configs/cone_gauss_sweep.yaml")
    p.add_argument("--out", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    cfg = load_config(args.config)
    if args.reps is not None:
        cfg.reps = args.reps
    out = Path(args.out or cfg.outputs)
    status = cli.cmd_sweep(cfg, out, workers=args.workers)
    if status:
        raise SystemExit(status)

    rows = cli.read_csv(out / "sweep.csv")
    print(f"{'T':>7} {'w':>8} {'mean':>10} {'stderr':>8} {'bound':>11} {'ratio':>9}")
    for r in rows:
        mean, se, bound = float(r["mean_regret"]), float(r["stderr"]), float(r["bound_total"])
        print(f"{int(r['T']):>7d} {float(r['w']):>8.4f} {mean:>10.2f} {se:>8.2f} {bound:>11.4g} {(mean + 2 * se) / bound:>9.2e}")
    print(f"wrote {out / 'sweep.csv'} and {out / 'fit.json'}")


if __name__ == "__main__":
    main()
