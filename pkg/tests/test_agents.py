import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cautious_bandits.agents import (
    AbstentionAgent,
    AgentConfig,
    AgentSpec,
    BinStats,
    ProtocolError,
    confidence_radius,
    make_baseline,
)
from cautious_bandits.analysis import sigma_w
from cautious_bandits.environments import EnvSpec, InputDistribution, NoiseModel, RewardFunction

ENV = EnvSpec(RewardFunction.cone(1.0), NoiseModel.gaussian(0.25), InputDistribution.gaussian_iso(1))


def test_sigma_w_examples():
    assert sigma_w(3, 2.0, 0.0, 0.7) == 0.7
    assert sigma_w(1, 1.0, 0.5, 0.0) == 0.5
    assert sigma_w(4, 2.0, 0.5, 1.0) == pytest.approx(2.2360680, abs=1e-7)


def test_confidence_radius_examples():
    assert confidence_radius(0, 1.0, 10, 0.5) == math.inf
    assert confidence_radius(8, 1.0, 10, 0.5) == pytest.approx(math.sqrt(2 * math.log(20000) / 8))
    assert confidence_radius(8, 1.0, 10, 0.5) == pytest.approx(1.5735, abs=1e-4)


@given(st.integers(1, 10**6), st.floats(0.01, 10), st.integers(1, 10**6), st.floats(0.05, 5))
def test_confidence_radius_quarter_rule(k, sw, T, c):
    assert confidence_radius(4 * k, sw, T, c) == pytest.approx(confidence_radius(k, sw, T, c) / 2, rel=1e-12)


def test_confidence_radius_strictly_decreasing():
    ks = np.arange(1, 10**6 + 1)
    g = np.array([confidence_radius(int(k), 0.3, 1000, 0.5) for k in ks[:2000]])
    assert np.all(np.diff(g) < 0)
    # vectorized check over the full range with the same closed form
    full = math.sqrt(0.09 * (math.log(2) + 4 * math.log(1000)) / 0.5) / np.sqrt(ks)
    assert np.all(np.diff(full) < 0)
    assert full[7] == pytest.approx(confidence_radius(8, 0.3, 1000, 0.5))


def test_agent_config_defaults():
    cfg = AgentConfig(n=1, L=1.0, sigma=0.25, T=8)
    assert cfg.w == pytest.approx(0.5)
    assert cfg.m == pytest.approx(math.log(8))
    assert cfg.R == cfg.m + cfg.w
    assert cfg.sigma_w == math.sqrt(1 * 1 * 0.25 + 0.0625)
    p = AgentConfig(n=2, L=1.0, sigma=0.0, T=10**4, schedule="power", c_m=0.25)
    assert p.m == pytest.approx(10.0)
    assert AgentConfig(n=1, L=1, sigma=0, T=1).m == 0.0


def test_act_far_input_abstains():
    cfg = AgentConfig(n=2, L=1.0, sigma=0.25, T=1000)
    agent = AbstentionAgent(cfg)
    assert agent.act((cfg.R + 0.01, 0.0)) == 0
    assert agent.ood_abstains == 1


def test_first_visit_commits_and_protocol():
    agent = AbstentionAgent(AgentConfig(n=1, L=1.0, sigma=0.25, T=100))
    assert agent.act((0.1,)) == 1
    with pytest.raises(ProtocolError):
        agent.act((0.1,))
    agent.observe(0.7)
    key = next(iter(agent.bins))
    assert (agent.bins[key].k, agent.bins[key].mu_hat) == (1, 0.7)
    with pytest.raises(ProtocolError):
        agent.observe(0.3)


@pytest.mark.parametrize("rewards, mean", [([1.0, 0.0], 0.5), ([2.0, -1.0, -4.0], -1.0)])
def test_running_mean_examples(rewards, mean):
    agent = AbstentionAgent(AgentConfig(n=1, L=1.0, sigma=100.0, T=100))
    for r in rewards:
        assert agent.act((0.05,)) == 1
        agent.observe(r)
    (stats,) = agent.bins.values()
    assert stats.k == len(rewards) and stats.mu_hat == pytest.approx(mean)


def test_certification_predicate_example():
    # mu_hat=-10 with gamma(k)=1 and margin 0.5 is certified
    agent = AbstentionAgent(AgentConfig(n=1, L=1.0, sigma=0.0, T=100, w=0.5))
    assert agent._margin == 0.5
    k = math.ceil(agent._gamma_scale**2)
    stats = BinStats(k=k, mu_hat=-10.0)
    assert agent.gamma(k) <= 1.0
    assert agent.predicate(stats)
    # equality is not certification
    tie = BinStats(k=k, mu_hat=-(agent.gamma(k) + 0.5))
    assert not agent.predicate(BinStats(k=k, mu_hat=tie.mu_hat + 1e-12))


def test_certified_bin_is_absorbing():
    agent = AbstentionAgent(AgentConfig(n=1, L=1.0, sigma=0.0, T=100, w=0.5, m=5.0))
    x = (2.2,)
    certified_at = None
    for t in range(200):
        y = agent.act(x)
        if y == 1:
            if agent.observe(-1.2):
                certified_at = t
        elif certified_at is None:
            pytest.fail("abstained before certification")
    (stats,) = agent.bins.values()
    assert stats.certified and stats.k == certified_at + 1
    assert agent.certified_bins == 1


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=500))
def test_incremental_mean_matches_batch(rewards):
    agent = AbstentionAgent(AgentConfig(n=1, L=1.0, sigma=1e6, T=10))
    for r in rewards:
        assert agent.act((0.0,)) == 1
        agent.observe(r)
    (stats,) = agent.bins.values()
    want = math.fsum(rewards) / len(rewards)
    assert abs(stats.mu_hat - want) <= 1e-9 * max(1.0, abs(want), max(abs(r) for r in rewards))


def test_incremental_mean_long_sequences():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 10**4))
        r = rng.normal(-1, 3, size=n)
        mu = 0.0
        for k, v in enumerate(r.tolist(), 1):
            mu += (v - mu) / k
        want = math.fsum(r) / n
        assert abs(mu - want) <= 1e-9 * max(1.0, abs(want))


def test_agent_is_deterministic():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(3000, 2)) * 2
    R = rng.normal(size=3000) - 0.5

    def play():
        agent = AbstentionAgent(AgentConfig(n=2, L=1.0, sigma=0.25, T=3000))
        out = []
        for x, r in zip(X.tolist(), R.tolist()):
            y = agent.act(x)
            out.append(y)
            if y:
                agent.observe(r)
        return out

    assert play() == play()


def test_baselines():
    assert make_baseline("always_abstain").act((5.0,)) == 0
    assert make_baseline("always_commit").act((5.0,)) == 1
    cf = make_baseline("commit_first", j=1)
    assert cf.act((0.0,)) == 1
    cf.observe(0.0)
    assert cf.act((0.0,)) == 0
    cf3 = make_baseline("commit_first", j=3)
    ys = []
    for _ in range(5):
        ys.append(cf3.act((0.0,)))
        if ys[-1]:
            cf3.observe(0.0)
    assert ys == [1, 1, 1, 0, 0]
    oracle = make_baseline("oracle", env=ENV)
    assert oracle.act((2.0,)) == 0
    assert oracle.act((0.5,)) == 1
    with pytest.raises(ProtocolError):
        oracle.act((0.5,))


def test_agent_spec_falls_back_to_env():
    cfg = AgentSpec.of("abstention").agent_config(ENV, 64)
    assert cfg.L == 1.0 and cfg.sigma == 0.25 and cfg.c == 0.5
    assert AgentSpec.of("abstention", L=2.0, w=0.1).agent_config(ENV, 64).w == 0.1
    with pytest.raises(ValueError):
        AgentSpec.of("ucb")
