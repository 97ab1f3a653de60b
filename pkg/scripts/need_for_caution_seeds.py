"""How often the need-for-caution verdict comes out DIVERGING across base seeds.

The running mean of first-round regret under an infinite-mean input law is
itself heavy tailed: a single huge draw among the first 10^3 replications can
push the early mean above the 10^6 mean. This script estimates the per-seed
DIVERGING rate and the implied chance that at least 9 of 10 seeds agree.

    python3 scripts/need_for_caution_seeds.py --seeds 1000
"""

import argparse

import numpy as np
from scipy.stats import binom

from cautious_bandits.demos import DIVERGENCE_THRESHOLD, need_for_caution


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--first-seed", type=int, default=0)
    args = p.parse_args()

    res = [need_for_caution(s) for s in range(args.first_seed, args.first_seed + args.seeds)]
    means = np.array([r.running_means for r in res])
    diverging = np.array([r.verdict == "DIVERGING" for r in res])
    rate = diverging.mean()

    print(f"checkpoints: {res[0].checkpoints}")
    print(f"median running mean: {np.round(np.median(means, axis=0), 3).tolist()}")
    print(f"fraction with mean at 1e6 > {DIVERGENCE_THRESHOLD:g}: {np.mean(means[:, -1] > DIVERGENCE_THRESHOLD):.3f}")
    print(f"fraction with mean at 1e6 > mean at 1e3: {np.mean(means[:, -1] > means[:, 0]):.3f}")
    print(f"per-seed DIVERGING rate: {rate:.3f}")
    print(f"P(at least 9 of 10 seeds DIVERGING) = {binom.sf(8, 10, rate):.3f}")


if __name__ == "__main__":
    main()
