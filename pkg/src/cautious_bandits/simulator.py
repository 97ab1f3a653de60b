"""Episode loop, regret accounting, good-event audit and seeded replication.

Seeding: an episode seed ``s`` (64-bit) is split into three independent
streams ``SeedSequence(s, spawn_key=(i,))`` for i = 0 (inputs), 1 (noise),
2 (agent). Replication ``r`` of a Monte Carlo run with base seed ``b`` uses
the episode seed ``SeedSequence(b, spawn_key=(r,)).generate_state(1, uint64)``.
All streams use the PCG64 bit generator.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .agents import AgentConfig, AgentSpec, ProtocolError, confidence_radius
from .environments import (
    COMMIT,
    DEFAULT_ORACLE_PRECISION,
    EnvSpec,
    UnreachableBinError,
    bin_mean_oracle,
    sample_inputs,
    validate_env,
)
from .geometry import BinKey, bin_keys

GENERATOR = "PCG64"
STREAM_INPUTS, STREAM_NOISE, STREAM_AGENT = 0, 1, 2
FULL_TRACE_LIMIT = 10**5
DEFAULT_THIN_STRIDE = 100


class AbortedRunError(RuntimeError):
    def __init__(self, t: int, cause: Exception, rep: int | None = None):
        self.t, self.cause, self.rep = t, cause, rep
        where = f"rep {rep}, " if rep is not None else ""
        super().__init__(f"episode aborted at {where}t={t}: {cause}")


class AuditUnavailableError(RuntimeError):
    pass


def substream(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(stream,))))


def rep_seed(base_seed: int, rep: int) -> int:
    return int(np.random.SeedSequence(int(base_seed), spawn_key=(rep,)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RoundRecord:
    t: int
    x: tuple[float, ...]
    y: int
    r_obs: float
    r_true_commit: float
    delta: float
    certified: bool


@dataclass
class Trace:
    """Columnar per-round trace. ``t`` is 1-based.

    ``r_obs`` is what the agent would see on that round (true reward of the
    chosen action plus that round's noise draw); agents only receive it on
    commits. ``certified`` marks rounds whose feedback certified a bin.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r_obs: np.ndarray
    r_true_commit: np.ndarray
    delta: np.ndarray
    certified: np.ndarray
    stride: int = 1

    def __len__(self):
        return len(self.t)

    def rows(self) -> Iterator[RoundRecord]:
        for i in range(len(self.t)):
            yield RoundRecord(
                int(self.t[i]),
                tuple(float(v) for v in self.x[i]),
                int(self.y[i]),
                float(self.r_obs[i]),
                float(self.r_true_commit[i]),
                float(self.delta[i]),
                bool(self.certified[i]),
            )

    def thinned(self, stride: int) -> "Trace":
        sl = slice(stride - 1, None, stride)
        return Trace(
            self.t[sl], self.x[sl], self.y[sl], self.r_obs[sl],
            self.r_true_commit[sl], self.delta[sl], self.certified[sl], stride * self.stride,
        )


@dataclass
class RunResult:
    T: int
    seed: int
    cum_regret: float
    commits: int
    certified_bins: int
    ood_abstains: int
    max_step_regret: float
    trace: Trace | None = None
    bin_width: float | None = None
    good_event: bool | None = None
    rep: int | None = None

    @property
    def abstains(self) -> int:
        return self.T - self.commits

    def summary(self) -> dict:
        return {
            "rep": self.rep,
            "seed": self.seed,
            "T": self.T,
            "cum_regret": self.cum_regret,
            "commits": self.commits,
            "abstains": self.abstains,
            "certified_bins": self.certified_bins,
            "ood_abstains": self.ood_abstains,
            "max_step_regret": self.max_step_regret,
            "good_event": self.good_event,
        }


def run_episode(env: EnvSpec, agent, T: int, seed: int, trace: str | int = "auto") -> RunResult:
    """Play ``T`` rounds of ``agent`` against ``env``.

    Args:
        trace: ``"full"``, ``"none"``, a thinning stride, or ``"auto"`` (full
            up to 1e5 rounds, then thinned every 100 rounds).

    Raises:
        AbortedRunError: if the agent breaks the act/observe protocol.
    """
    X = sample_inputs(env.inputs, substream(seed, STREAM_INPUTS), T)
    # one noise draw per round, consumed only when the agent commits
    eta = np.asarray(env.noise.draw(substream(seed, STREAM_NOISE), size=T), dtype=float)
    r_commit = env.commit_rewards(X)

    xs = X.tolist()
    rc = r_commit.tolist()
    noise = eta.tolist()
    ys = np.zeros(T, dtype=np.int8)
    deltas = np.empty(T)
    cert = np.zeros(T, dtype=bool)
    cum, worst, commits = 0.0, 0.0, 0
    act, observe = agent.act, agent.observe
    for i in range(T):
        r = rc[i]
        try:
            y = act(xs[i])
            if y == COMMIT:
                cert[i] = observe(r + noise[i])
                commits += 1
                d = (r if r > 0 else 0.0) - r
            else:
                d = r if r > 0 else 0.0
        except ProtocolError as exc:
            raise AbortedRunError(i + 1, exc) from exc
        ys[i] = y
        deltas[i] = d
        cum += d
        if d > worst:
            worst = d

    if trace == "auto":
        trace = "full" if T <= FULL_TRACE_LIMIT else DEFAULT_THIN_STRIDE
    tr = None
    if trace != "none":
        r_obs = np.where(ys == COMMIT, r_commit, 0.0) + eta
        tr = Trace(np.arange(1, T + 1), X, ys, r_obs, r_commit, deltas, cert)
        if trace != "full" and int(trace) > 1:
            tr = tr.thinned(int(trace))

    cfg = getattr(agent, "config", None)
    return RunResult(
        T=T,
        seed=int(seed),
        cum_regret=cum,
        commits=commits,
        certified_bins=int(getattr(agent, "certified_bins", 0)),
        ood_abstains=int(getattr(agent, "ood_abstains", 0)),
        max_step_regret=worst,
        trace=tr,
        bin_width=cfg.w if cfg is not None else None,
    )


def brute_force_regret(result: RunResult, env: EnvSpec) -> float:
    """Recompute cumulative regret from the trace's inputs and actions alone."""
    tr = _full_trace(result)
    r = env.commit_rewards(tr.x)
    best = np.maximum(r, 0.0)
    got = np.where(tr.y == COMMIT, r, 0.0)
    return math.fsum(best - got)


def _full_trace(result: RunResult) -> Trace:
    if result.trace is None or result.trace.stride != 1:
        raise AuditUnavailableError("a full, unthinned trace is required")
    return result.trace


@functools.lru_cache(maxsize=2**16)
def _bin_mean(env: EnvSpec, key: BinKey, w: float, precision: float) -> float:
    return bin_mean_oracle(env, key, w, precision)


def audit_good_event(
    result: RunResult,
    env: EnvSpec,
    config: AgentConfig,
    precision: float = DEFAULT_ORACLE_PRECISION,
) -> bool:
    """Replay the trace and check ``|mu_hat - mu_B| <= gamma(k) + 3 precision``
    after every commit.

    Raises:
        AuditUnavailableError: on thinned/missing traces or unreachable bins.
    """
    tr = _full_trace(result)
    idx = np.flatnonzero(tr.y == COMMIT)
    if len(idx) == 0:
        return True
    keys = bin_keys(tr.x[idx], config.w)
    sw = config.sigma_w
    slack = 3 * precision
    stats: dict[BinKey, list] = {}
    for row, i in zip(keys.tolist(), idx.tolist()):
        key = tuple(row)
        try:
            mu = _bin_mean(env, key, config.w, precision)
        except UnreachableBinError as exc:
            raise AuditUnavailableError(str(exc)) from exc
        s = stats.setdefault(key, [0, 0.0])
        s[0] += 1
        s[1] += (tr.r_obs[i] - s[1]) / s[0]
        if abs(s[1] - mu) > confidence_radius(s[0], sw, config.T, config.c) + slack:
            return False
    return True


def count_precert_commits(result: RunResult, key: Sequence[int], w: float | None = None) -> int:
    """Commits made in ``key`` up to and including the round that certified it."""
    tr = _full_trace(result)
    w = result.bin_width if w is None else w
    key = tuple(int(k) for k in key)
    idx = np.flatnonzero(tr.y == COMMIT)
    if len(idx) == 0:
        return 0
    keys = bin_keys(tr.x[idx], w)
    count = 0
    for row, i in zip(keys.tolist(), idx.tolist()):
        if tuple(row) == key:
            count += 1
            if tr.certified[i]:
                break
    return count


@dataclass
class SafetyReport:
    ood_commits: int = 0
    post_certification_commits: int = 0

    @property
    def ok(self) -> bool:
        return self.ood_commits == 0 and self.post_certification_commits == 0


def check_safety(result: RunResult, config: AgentConfig) -> SafetyReport:
    """Count commits beyond radius R and commits in already-certified bins."""
    tr = _full_trace(result)
    norms = np.linalg.norm(tr.x, axis=1)
    commit = tr.y == COMMIT
    rep = SafetyReport(ood_commits=int(np.sum(commit & (norms > config.R))))
    keys = bin_keys(tr.x, config.w)
    done: set = set()
    for i in np.flatnonzero(commit).tolist():
        key = tuple(keys[i].tolist())
        if key in done:
            rep.post_certification_commits += 1
        if tr.certified[i]:
            done.add(key)
    return rep


# ---------------------------------------------------------------- Monte Carlo


@dataclass
class MonteCarloResult:
    T: int
    reps: int
    base_seed: int
    mean: float
    std: float
    stderr: float
    runs: list[RunResult] = field(default_factory=list)

    @property
    def good_event_rate(self) -> float | None:
        flags = [r.good_event for r in self.runs if r.good_event is not None]
        return sum(flags) / len(flags) if flags else None

    def column_mean(self, attr: str) -> float:
        return math.fsum(getattr(r, attr) for r in self.runs) / len(self.runs)


def _episode_job(args) -> RunResult:
    env, agent_factory, T, base_seed, rep, audit, keep_traces, trace = args
    seed = rep_seed(base_seed, rep)
    if isinstance(agent_factory, AgentSpec):
        agent = agent_factory.build(env, T, substream(seed, STREAM_AGENT))
    else:
        agent = agent_factory(env, T, substream(seed, STREAM_AGENT))
    try:
        res = run_episode(env, agent, T, seed, trace="full" if audit else trace)
    except AbortedRunError as exc:
        raise AbortedRunError(exc.t, exc.cause, rep=rep) from exc
    res.rep = rep
    if audit and isinstance(getattr(agent, "config", None), AgentConfig):
        res.good_event = audit_good_event(res, env, agent.config)
    if not keep_traces:
        res.trace = None
    return res


def aggregate(T: int, base_seed: int, runs: list[RunResult]) -> MonteCarloResult:
    runs = sorted(runs, key=lambda r: r.rep)
    vals = np.array([r.cum_regret for r in runs])
    mean = math.fsum(vals) / len(vals)
    std = float(np.sqrt(math.fsum((vals - mean) ** 2) / (len(vals) - 1))) if len(vals) > 1 else 0.0
    return MonteCarloResult(T, len(runs), base_seed, mean, std, std / math.sqrt(len(vals)), runs)


def monte_carlo(
    env: EnvSpec,
    agent_factory: AgentSpec | Callable,
    T: int,
    reps: int,
    base_seed: int,
    workers: int = 1,
    audit: bool = False,
    keep_traces: bool = False,
    trace: str | int = "none",
) -> MonteCarloResult:
    """Run ``reps`` independent episodes and aggregate in rep-index order.

    ``agent_factory`` is an :class:`AgentSpec` or a callable
    ``(env, T, rng) -> agent``; it must be picklable when ``workers > 1``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    validate_env(env).raise_if_invalid()
    if keep_traces and trace == "none":
        trace = "auto"
    jobs = [(env, agent_factory, T, base_seed, rep, audit, keep_traces, trace) for rep in range(reps)]
    if workers <= 1:
        runs = [_episode_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_episode_job, jobs, chunksize=max(1, reps // (4 * workers))))
    return aggregate(T, base_seed, runs)
