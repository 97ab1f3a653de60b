import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cautious_bandits.agents import AgentConfig
from cautious_bandits.environments import (
    EnvSpec,
    InputDistribution,
    NoiseModel,
    RewardFunction,
    UnreachableBinError,
    UnsupportedQueryError,
    bin_mean_oracle,
    bin_probability,
    observe,
    reward_eval,
    sample_input,
    sample_inputs,
    survival,
    validate_env,
)
from cautious_bandits.geometry import bin_key, is_trusted

cone = RewardFunction.cone(L=1.0, r0=1.0)


def env_of(inputs, reward=cone, noise=NoiseModel.none()):
    return EnvSpec(reward, noise, inputs)


def test_reward_eval_examples():
    env = env_of(InputDistribution.gaussian_iso(2))
    assert reward_eval(env, (0.0, 0.0), 1) == 1.0
    assert reward_eval(env, (3.0, 4.0), 1) == -4.0
    assert reward_eval(env, (3.0, 4.0), 0) == 0.0
    assert reward_eval(env_of(InputDistribution.gaussian_iso(1), RewardFunction.constant_one()), (1e9,), 1) == 1.0


def test_cone_matches_formula_on_random_inputs():
    rng = np.random.default_rng(1)
    env = env_of(InputDistribution.gaussian_iso(3), RewardFunction.cone(L=2.5, r0=0.5))
    X = rng.normal(scale=10, size=(10**5, 3))
    want = 0.5 - 2.5 * np.sqrt(np.sum(X * X, axis=1))
    np.testing.assert_allclose(env.commit_rewards(X), want, rtol=0, atol=1e-12 * (1 + np.abs(want).max()))


def test_radial_profile_interpolates():
    rf = RewardFunction.radial_profile([0, 1, 3], [1.0, 0.0, -4.0], L=2.0)
    assert rf.at_norm(0.5) == pytest.approx(0.5)
    assert rf.at_norm(2.0) == pytest.approx(-2.0)
    assert rf.at_norm(10.0) == pytest.approx(-4.0)


def test_observe_noiseless_equals_reward():
    env = env_of(InputDistribution.gaussian_iso(2))
    rng = np.random.default_rng(0)
    for x in sample_inputs(env.inputs, rng, 50):
        assert observe(env, x, 1, rng) == reward_eval(env, x, 1)
        assert observe(env, x, 0, rng) == 0.0


def test_observe_gaussian_is_reward_plus_one_draw():
    env = env_of(InputDistribution.gaussian_iso(1), noise=NoiseModel.gaussian(0.3))
    a, b = np.random.default_rng(7), np.random.default_rng(7)
    for _ in range(100):
        assert observe(env, (0.4,), 1, a) == reward_eval(env, (0.4,), 1) + b.normal(0.0, 0.3)


def test_gaussian_noise_mean():
    sigma = 0.25
    noise = NoiseModel.gaussian(sigma)
    draws = noise.draw(np.random.default_rng(11), size=10**6)
    assert abs(draws.mean()) <= 4 * sigma / 1e3


def test_bounded_uniform_support_and_proxy():
    noise = NoiseModel.bounded_uniform(-0.5, 0.5)
    assert noise.sigma_proxy == 0.5
    env = env_of(InputDistribution.gaussian_iso(1), noise=noise)
    rng = np.random.default_rng(3)
    for _ in range(2000):
        assert abs(observe(env, (0.2,), 1, rng) - 0.8) <= 0.5
    assert NoiseModel.gaussian(0.7).sigma_proxy == 0.7
    assert NoiseModel.none().sigma_proxy == 0.0


def test_sample_input_examples():
    rng = np.random.default_rng(0)
    pm = InputDistribution.point_mass((1.0, -2.0))
    assert all(tuple(sample_input(pm, rng)) == (1.0, -2.0) for _ in range(10))
    sph = InputDistribution.sphere(2, 1000.0)
    norms = np.linalg.norm(sample_inputs(sph, rng, 10**4), axis=1)
    np.testing.assert_allclose(norms, 1000.0, rtol=1e-14)


def test_pareto_empirical_survival():
    d = InputDistribution.pareto_radial(1, alpha=1.0, r_min=1.0)
    X = sample_inputs(d, np.random.default_rng(5), 10**6)
    emp = np.mean(np.linalg.norm(X, axis=1) >= 10)
    assert abs(emp - 0.1) <= 0.005


def test_survival_examples():
    assert survival(InputDistribution.sphere(2, 1000.0), math.log(1000)) == 1.0
    assert survival(InputDistribution.pareto_radial(3, 2.0, 1.0), 10.0) == pytest.approx(0.01)
    for d in SHIPPED:
        assert survival(d, 0.0) == 1.0
    with pytest.raises(UnsupportedQueryError):
        survival(InputDistribution.uniform_box(2, 0, 1), 0.5)


SHIPPED = [
    InputDistribution.gaussian_iso(1, 1.0),
    InputDistribution.gaussian_iso(3, 2.0),
    InputDistribution.laplace_radial(2, 1.5),
    InputDistribution.pareto_radial(1, 1.0, 1.0),
    InputDistribution.pareto_radial(2, 2.5, 0.5),
    InputDistribution.sphere(2, 3.0),
    InputDistribution.point_mass((1.0, 1.0)),
    InputDistribution.uniform_box(1, -1.0, 3.0),
]


@pytest.mark.parametrize("dist", SHIPPED, ids=lambda d: f"{d.kind}-n{d.n}")
def test_survival_nonincreasing_and_vanishing(dist):
    radii = np.linspace(0, 50, 400)
    s = [survival(dist, r) for r in radii]
    assert all(a >= b for a, b in zip(s, s[1:]))
    assert survival(dist, 1e12) < 1e-10


@given(st.floats(0.1, 5), st.floats(0.1, 4), st.floats(0, 100))
def test_pareto_survival_closed_form(alpha, r_min, r):
    d = InputDistribution.pareto_radial(2, alpha, r_min)
    want = 1.0 if r <= r_min else (r_min / r) ** alpha
    assert survival(d, r) == pytest.approx(want)


def test_validate_examples():
    assert validate_env(env_of(InputDistribution.gaussian_iso(1))).ok
    bad = validate_env(env_of(InputDistribution.gaussian_iso(1), RewardFunction.cone(L=1, r0=2)))
    assert not bad.ok and any("sup" in v for v in bad.violations)
    steep = RewardFunction.radial_profile([0, 1, 2], [1.0, 0.5, -2.5], L=1.0)
    rep = validate_env(env_of(InputDistribution.gaussian_iso(1), steep))
    assert not rep.ok and any("slope" in v for v in rep.violations)
    neg = RewardFunction.cone(L=1, r0=-0.5)
    assert not validate_env(env_of(InputDistribution.gaussian_iso(1), neg)).ok
    lopsided = env_of(InputDistribution.gaussian_iso(1), noise=NoiseModel.bounded_uniform(-0.2, 0.5))
    assert not validate_env(lopsided).ok


def test_sampled_lipschitz_check():
    from cautious_bandits.environments import _sampled_lipschitz_ok

    assert _sampled_lipschitz_ok(RewardFunction.cone(L=2.0), 3)
    assert _sampled_lipschitz_ok(RewardFunction.constant_one(L=0.1), 2)
    assert not _sampled_lipschitz_ok(RewardFunction.radial_profile([0, 1], [1.0, -2.0], L=1.0), 2)


def test_bin_mean_point_mass_and_constant():
    env = env_of(InputDistribution.point_mass((2.0,)))
    assert bin_mean_oracle(env, bin_key((2.0,), 0.3), 0.3) == reward_eval(env, (2.0,), 1)
    with pytest.raises(UnreachableBinError):
        bin_mean_oracle(env, (0,), 0.3)
    const = env_of(InputDistribution.gaussian_iso(2), RewardFunction.constant_one())
    assert bin_mean_oracle(const, (1, -2), 0.5) == 1.0


def test_bin_mean_uniform_bin_closed_form():
    # uniform on [2, 3], cone 1 - |x|: mean is 1 - 2.5
    env = env_of(InputDistribution.uniform_box(1, 2.0, 3.0))
    assert bin_mean_oracle(env, (2,), 1.0) == pytest.approx(-1.5, abs=1e-9)


def test_bin_mean_unreachable_far_tail():
    env = env_of(InputDistribution.gaussian_iso(1))
    with pytest.raises(UnreachableBinError):
        bin_mean_oracle(env, (100,), 0.5)


@pytest.mark.parametrize("key", [(0,), (-1,), (3,), (-7,)])
def test_bin_mean_quadrature_matches_rejection(key):
    w = 0.4
    env = env_of(InputDistribution.gaussian_iso(1))
    rng = np.random.default_rng(abs(key[0]))
    lo = key[0] * w
    X = rng.normal(size=4 * 10**6)
    X = X[(X >= lo) & (X < lo + w)]
    if len(X) < 2000:
        # sample the conditional law directly by inverse cdf
        from scipy.stats import norm
        u = rng.uniform(norm.cdf(lo), norm.cdf(lo + w), size=10**5)
        X = norm.ppf(u)
    mc = np.mean(1 - np.abs(X))
    assert bin_mean_oracle(env, key, w) == pytest.approx(mc, abs=4 * np.std(1 - np.abs(X)) / math.sqrt(len(X)) + 1e-9)


def test_bin_mean_gaussian_2d_matches_rejection():
    w = 0.5
    env = env_of(InputDistribution.gaussian_iso(2, 1.0))
    key = (1, -2)
    rng = np.random.default_rng(9)
    X = rng.normal(size=(4 * 10**6, 2))
    inside = (X[:, 0] >= 0.5) & (X[:, 0] < 1.0) & (X[:, 1] >= -1.0) & (X[:, 1] < -0.5)
    mc = np.mean(1 - np.linalg.norm(X[inside], axis=1))
    assert bin_mean_oracle(env, key, w, precision=1e-4) == pytest.approx(mc, abs=3e-3)


def test_shell_sampler_matches_plain_rejection():
    env = env_of(InputDistribution.laplace_radial(2, 1.0))
    key, w = (2, -1), 0.4
    rng = np.random.default_rng(21)
    X = sample_inputs(env.inputs, rng, 4 * 10**6)
    inside = (X[:, 0] >= 0.8) & (X[:, 0] < 1.2) & (X[:, 1] >= -0.4) & (X[:, 1] < 0.0)
    assert bin_probability(env.inputs, key, w) == pytest.approx(inside.mean(), rel=0.05)
    mc = np.mean(env.commit_rewards(X[inside]))
    assert bin_mean_oracle(env, key, w, precision=1e-4) == pytest.approx(mc, abs=3e-3)


def test_bin_probability_gaussian_product():
    from scipy.stats import norm
    d = InputDistribution.gaussian_iso(2, 2.0)
    p = bin_probability(d, (0, -1), 0.5)
    assert p == pytest.approx((norm.cdf(0.25) - 0.5) * (0.5 - norm.cdf(-0.25)))


BIN_BOUND_ENVS = [
    env_of(InputDistribution.gaussian_iso(1)),
    env_of(InputDistribution.gaussian_iso(2)),
    env_of(InputDistribution.laplace_radial(2, 1.0)),
    env_of(InputDistribution.pareto_radial(1, 1.0, 1.0)),
    env_of(InputDistribution.sphere(2, 1.5)),
    env_of(InputDistribution.uniform_box(1, -2.0, 2.0), RewardFunction.radial_profile([0, 1, 4], [0.8, -1.0, -2.5], L=1.8)),
]


@pytest.mark.parametrize("env", BIN_BOUND_ENVS, ids=lambda e: f"{e.inputs.kind}-n{e.n}")
def test_bin_mean_within_lipschitz_envelope(env):
    """Every point of a bin is within L sqrt(n) w of the bin mean."""
    cfg = AgentConfig(n=env.n, L=env.reward.L, sigma=0.0, T=1000)
    rng = np.random.default_rng(2024)
    X = sample_inputs(env.inputs, rng, 20000)
    keys = {bin_key(x, cfg.w) for x in X}
    keys = sorted(k for k in keys if is_trusted(k, cfg.region))
    keys = [keys[i] for i in rng.permutation(len(keys))[:100]]
    prec = 1e-3
    for key in keys:
        mu = bin_mean_oracle(env, key, cfg.w, prec)
        pts = (np.asarray(key) + rng.uniform(size=(1000, env.n))) * cfg.w
        dev = np.abs(env.commit_rewards(pts) - mu)
        assert dev.max() <= cfg.margin + 3 * prec
