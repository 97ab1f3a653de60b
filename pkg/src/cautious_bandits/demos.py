"""Built-in reproductions of the two impossibility constructions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agents import AgentSpec
from .environments import EnvSpec, InputDistribution, NoiseModel, RewardFunction, sample_inputs
from .simulator import STREAM_INPUTS, RunResult, rep_seed, run_episode, substream

CHECKPOINTS = (10**3, 10**4, 10**5, 10**6)
DIVERGENCE_THRESHOLD = 10.0


@dataclass
class NeedForCautionResult:
    base_seed: int
    checkpoints: tuple[int, ...]
    running_means: tuple[float, ...]

    @property
    def verdict(self) -> str:
        first, last = self.running_means[0], self.running_means[-1]
        return "DIVERGING" if last > first and last > DIVERGENCE_THRESHOLD else "BOUNDED"


def need_for_caution_env(L: float = 1.0, alpha: float = 1.0, n: int = 1) -> EnvSpec:
    return EnvSpec(
        RewardFunction.cone(L=L, r0=1.0),
        NoiseModel.none(),
        InputDistribution.pareto_radial(n, alpha=alpha, r_min=1.0),
    )


def first_step_regret(env: EnvSpec, X: np.ndarray) -> np.ndarray:
    """Regret of committing on the first input of each replication."""
    r = env.commit_rewards(X)
    return np.maximum(r, 0.0) - r


def need_for_caution(
    base_seed: int,
    checkpoints=CHECKPOINTS,
    L: float = 1.0,
    alpha: float = 1.0,
) -> NeedForCautionResult:
    """Running Monte Carlo mean of the first-round regret of ``commit_first(1)``.

    Only round one matters and ``commit_first`` commits there unconditionally,
    so the first inputs of all replications are drawn in one batch from the
    input stream of ``base_seed``.
    """
    env = need_for_caution_env(L, alpha)
    N = max(checkpoints)
    X = sample_inputs(env.inputs, substream(base_seed, STREAM_INPUTS), N)
    running = np.cumsum(first_step_regret(env, X)) / np.arange(1, N + 1)
    cps = tuple(int(c) for c in checkpoints)
    return NeedForCautionResult(base_seed, cps, tuple(float(running[c - 1]) for c in cps))


@dataclass
class LimitsOfCautionResult:
    T: int
    regret_minus: float
    regret_plus: float
    commits_minus: int
    commits_plus: int
    runs: tuple[RunResult, RunResult]

    @property
    def verdict(self) -> str:
        return "LINEAR" if max(self.regret_minus, self.regret_plus) >= self.T / 2 else "SUBLINEAR"


def limits_of_caution_envs(T: int = 1000, n: int = 2, L: float = 1.0, sigma: float = 0.25):
    inputs = InputDistribution.sphere(n, float(T))
    noise = NoiseModel.gaussian(sigma)
    r_minus = EnvSpec(RewardFunction.cone(L=L, r0=1.0), noise, inputs)
    r_plus = EnvSpec(RewardFunction.constant_one(L=L), noise, inputs)
    return r_minus, r_plus


def limits_of_caution(base_seed: int, T: int = 1000, n: int = 2, L: float = 1.0) -> LimitsOfCautionResult:
    """The abstention agent with default schedules on inputs of norm exactly T,
    under the harmful cone reward and the constant reward."""
    seed = rep_seed(base_seed, 0)
    agent = AgentSpec.of("abstention", L=L)
    runs = []
    for env in limits_of_caution_envs(T, n, L):
        runs.append(run_episode(env, agent.build(env, T), T, seed, trace="full"))
    minus, plus = runs
    return LimitsOfCautionResult(T, minus.cum_regret, plus.cum_regret, minus.commits, plus.commits, (minus, plus))
