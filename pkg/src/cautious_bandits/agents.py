"""The risk-sensitive abstention agent and baseline policies.

All agents share one sequential protocol: ``act(x)`` returns 0 (abstain) or
1 (commit); after a commit the caller must pass the observed reward to
``observe(r)`` before the next ``act``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .analysis import default_schedules, log_union_term, sigma_w
from .environments import ABSTAIN, COMMIT, EnvSpec
from .geometry import BinKey, TrustedRegion, bin_key, is_trusted


class ProtocolError(RuntimeError):
    pass


@dataclass
class AgentConfig:
    """Parameters of the abstention agent. ``w`` and ``m`` default to the schedules."""

    n: int
    L: float
    sigma: float
    T: int
    c: float = 0.5
    w: float | None = None
    m: float | None = None
    schedule: str = "log"
    c_m: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.T < 1:
            raise ValueError(f"need n >= 1 and T >= 1, got n={self.n}, T={self.T}")
        if not self.L > 0 or self.sigma < 0 or not self.c > 0:
            raise ValueError(f"need L > 0, sigma >= 0, c > 0; got {self.L}, {self.sigma}, {self.c}")
        w0, m0 = default_schedules(self.T, self.n, self.schedule, self.c_m)
        if self.w is None:
            self.w = w0
        if self.m is None:
            self.m = m0

    @property
    def sigma_w(self) -> float:
        return sigma_w(self.n, self.L, self.w, self.sigma)

    @property
    def R(self) -> float:
        return self.m + math.sqrt(self.n) * self.w

    @property
    def margin(self) -> float:
        """Worst-case within-bin variation ``L sqrt(n) w``."""
        return self.L * math.sqrt(self.n) * self.w

    @property
    def region(self) -> TrustedRegion:
        return TrustedRegion(w=self.w, m=self.m, n=self.n)


def confidence_radius(k: int, sigma_w: float, T: int, c: float) -> float:
    if k <= 0:
        return math.inf
    return math.sqrt(sigma_w * sigma_w * log_union_term(T) / (c * k))


@dataclass
class BinStats:
    k: int = 0
    mu_hat: float = 0.0
    certified: bool = False


class AbstentionAgent:
    """Commits only inside the trusted region and only in bins not yet
    certified negative.

    Bin statistics are kept sparsely and frozen once a bin is certified.
    """

    def __init__(self, config: AgentConfig):
        self.config = config
        self.bins: dict[BinKey, BinStats] = {}
        self.pending: BinKey | None = None
        self.ood_abstains = 0
        self.certified_bins = 0
        self._trust: dict[BinKey, bool] = {}
        self._region = config.region
        self._margin = config.margin
        # gamma(k) = _gamma_scale / sqrt(k)
        self._gamma_scale = confidence_radius(1, config.sigma_w, config.T, config.c)

    def trusted(self, key: BinKey) -> bool:
        hit = self._trust.get(key)
        if hit is None:
            hit = self._trust[key] = is_trusted(key, self._region)
        return hit

    def gamma(self, k: int) -> float:
        return math.inf if k <= 0 else self._gamma_scale / math.sqrt(k)

    def predicate(self, stats: BinStats) -> bool:
        return stats.mu_hat + self.gamma(stats.k) + self._margin < 0

    def act(self, x: Sequence[float]) -> int:
        if self.pending is not None:
            raise ProtocolError("act called while a commit awaits feedback")
        key = bin_key(x, self.config.w)
        if not self.trusted(key):
            self.ood_abstains += 1
            return ABSTAIN
        stats = self.bins.get(key)
        if stats is not None and stats.certified:
            return ABSTAIN
        self.pending = key
        return COMMIT

    def observe(self, r_obs: float) -> bool:
        """Feed back a commit reward. Returns True if this certified the bin."""
        key = self.pending
        if key is None:
            raise ProtocolError("observe called with no pending commit")
        self.pending = None
        stats = self.bins.get(key)
        if stats is None:
            stats = self.bins[key] = BinStats()
        stats.k += 1
        stats.mu_hat += (r_obs - stats.mu_hat) / stats.k
        if self.predicate(stats):
            stats.certified = True
            self.certified_bins += 1
            return True
        return False


class _Baseline:
    def __init__(self):
        self.pending = False
        self.t = 0

    def _choose(self, x) -> int:
        raise NotImplementedError

    def act(self, x) -> int:
        if self.pending:
            raise ProtocolError("act called while a commit awaits feedback")
        self.t += 1
        y = self._choose(x)
        self.pending = y == COMMIT
        return y

    def observe(self, r_obs: float) -> bool:
        if not self.pending:
            raise ProtocolError("observe called with no pending commit")
        self.pending = False
        return False


class AlwaysCommit(_Baseline):
    def _choose(self, x):
        return COMMIT


class AlwaysAbstain(_Baseline):
    def _choose(self, x):
        return ABSTAIN


class CommitFirst(_Baseline):
    """Commits on rounds ``1..j`` and abstains afterwards."""

    def __init__(self, j: int = 1):
        super().__init__()
        self.j = j

    def _choose(self, x):
        return COMMIT if self.t <= self.j else ABSTAIN


class OracleAgent(_Baseline):
    """Reads the true reward; commits iff it is positive. Evaluation only."""

    def __init__(self, env: EnvSpec):
        super().__init__()
        self.env = env

    def _choose(self, x):
        return COMMIT if float(self.env.commit_rewards([x])[0]) > 0 else ABSTAIN


def make_baseline(kind: str, env: EnvSpec | None = None, j: int = 1):
    if kind == "always_commit":
        return AlwaysCommit()
    if kind == "always_abstain":
        return AlwaysAbstain()
    if kind == "commit_first":
        return CommitFirst(j)
    if kind == "oracle":
        if env is None:
            raise ValueError("oracle baseline needs the environment")
        return OracleAgent(env)
    raise ValueError(f"unknown baseline {kind!r}")


AGENT_KINDS = ("abstention", "always_commit", "always_abstain", "commit_first", "oracle")


@dataclass(frozen=True)
class AgentSpec:
    """Picklable recipe for building a fresh agent per episode.

    For ``kind="abstention"`` the parameters that are not given fall back to
    the environment: ``L`` to the reward's declared constant, ``sigma`` to the
    noise proxy.
    """

    kind: str = "abstention"
    params: tuple[tuple[str, Any], ...] = field(default=())

    @classmethod
    def of(cls, kind: str = "abstention", **params) -> "AgentSpec":
        if kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {kind!r}")
        return cls(kind, tuple(sorted((k, v) for k, v in params.items() if v is not None)))

    def get(self, name: str, default=None):
        return dict(self.params).get(name, default)

    def agent_config(self, env: EnvSpec, T: int) -> AgentConfig:
        p = dict(self.params)
        return AgentConfig(
            n=env.n,
            L=p.get("L", env.reward.L),
            sigma=p.get("sigma", env.noise.sigma_proxy),
            T=T,
            c=p.get("c", 0.5),
            w=p.get("w"),
            m=p.get("m"),
            schedule=p.get("schedule", "log"),
            c_m=p.get("c_m"),
        )

    def build(self, env: EnvSpec, T: int, rng: np.random.Generator | None = None):
        if self.kind == "abstention":
            return AbstentionAgent(self.agent_config(env, T))
        return make_baseline(self.kind, env=env, j=int(self.get("j", 1)))
