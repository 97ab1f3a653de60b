"""Mean cumulative regret of every agent kind on one environment.

    python3 scripts/compare_baselines.py --inputs pareto --T 5000 --reps 20
"""

import argparse

from cautious_bandits.agents import AgentSpec
from cautious_bandits.environments import EnvSpec, InputDistribution, NoiseModel, RewardFunction
from cautious_bandits.simulator import monte_carlo

INPUTS = {
    "gaussian": lambda: InputDistribution.gaussian_iso(1),
    "laplace": lambda: InputDistribution.laplace_radial(1, 1.0),
    "pareto": lambda: InputDistribution.pareto_radial(1, 1.5, 0.5),
}

AGENTS = [
    AgentSpec.of("abstention"),
    AgentSpec.of("always_commit"),
    AgentSpec.of("always_abstain"),
    AgentSpec.of("commit_first", j=100),
    AgentSpec.of("oracle"),
]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--inputs", choices=sorted(INPUTS), default="pareto")
    p.add_argument("--T", type=int, default=5000)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.25)
    args = p.parse_args()

    env = EnvSpec(RewardFunction.cone(1.0), NoiseModel.gaussian(args.sigma), INPUTS[args.inputs]())
    print(f"{'agent':<16} {'mean':>12} {'stderr':>10} {'commits':>9} {'worst step':>11}")
    for spec in AGENTS:
        mc = monte_carlo(env, spec, args.T, args.reps, args.seed)
        worst = max(r.max_step_regret for r in mc.runs)
        print(f"{spec.kind:<16} {mc.mean:>12.2f} {mc.stderr:>10.2f} {mc.column_mean('commits'):>9.1f} {worst:>11.2f}")


if __name__ == "__main__":
    main()
