"""Commit rewards, observation noise and input distributions.

Every commit reward shipped here is radial: ``r(x, 1) = f(||x||)`` for a
profile ``f``. The abstain reward is identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import integrate, special, stats

from .geometry import BinKey, InvalidInputError

ABSTAIN, COMMIT = 0, 1

DEFAULT_ORACLE_PRECISION = 1e-3
UNREACHABLE_PROBABILITY = 1e-12


class UnsupportedQueryError(NotImplementedError):
    pass


class UnreachableBinError(RuntimeError):
    pass


class EnvValidationError(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# ---------------------------------------------------------------- rewards


@dataclass(frozen=True)
class RewardFunction:
    """Radial commit reward.

    kinds:
        ``cone``: ``r0 - L * ||x||``
        ``constant_one``: ``1`` everywhere (``L`` is any declared positive constant)
        ``radial_profile``: linear interpolation of ``values`` at ``radii``
        (``radii[0] == 0``), held constant past the last knot
    """

    kind: str
    L: float = 1.0
    r0: float = 1.0
    radii: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    @classmethod
    def cone(cls, L: float = 1.0, r0: float = 1.0) -> "RewardFunction":
        return cls("cone", L=float(L), r0=float(r0))

    @classmethod
    def constant_one(cls, L: float = 1.0) -> "RewardFunction":
        return cls("constant_one", L=float(L))

    @classmethod
    def radial_profile(cls, radii, values, L: float) -> "RewardFunction":
        return cls(
            "radial_profile",
            L=float(L),
            radii=tuple(float(r) for r in radii),
            values=tuple(float(v) for v in values),
        )

    def at_norm(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == "cone":
            return self.r0 - self.L * rho
        if self.kind == "constant_one":
            return np.ones_like(rho)
        if self.kind == "radial_profile":
            return np.interp(rho, self.radii, self.values)
        raise ValueError(f"unknown reward kind {self.kind!r}")

    def breakpoints(self) -> tuple[float, ...]:
        """Norms at which the profile has a kink (always includes 0)."""
        if self.kind == "radial_profile":
            return tuple(sorted(set(self.radii) | {0.0}))
        return (0.0,)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "cone":
            return {"kind": "cone", "L": self.L, "r0": self.r0}
        if self.kind == "constant_one":
            return {"kind": "constant_one", "L": self.L}
        return {"kind": self.kind, "L": self.L, "radii": list(self.radii), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "RewardFunction":
        kind = d["kind"]
        if kind == "cone":
            return cls.cone(L=d["L"], r0=d.get("r0", 1.0))
        if kind == "constant_one":
            return cls.constant_one(L=d.get("L", 1.0))
        if kind == "radial_profile":
            return cls.radial_profile(d["radii"], d["values"], L=d["L"])
        raise ValueError(f"unknown reward kind {kind!r}")


# ---------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"
    sigma: float = 0.0
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def bounded_uniform(cls, a: float, b: float) -> "NoiseModel":
        return cls("bounded_uniform", a=float(a), b=float(b))

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls("none")

    @property
    def sigma_proxy(self) -> float:
        if self.kind == "gaussian":
            return self.sigma
        if self.kind == "bounded_uniform":
            # Hoeffding's lemma: a variable in [a, b] is (b - a)/2-subgaussian
            return (self.b - self.a) / 2
        return 0.0

    def draw(self, rng: np.random.Generator, size=None):
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size=size)
        if self.kind == "bounded_uniform":
            return rng.uniform(self.a, self.b, size=size)
        if self.kind == "none":
            return np.zeros(size) if size is not None else 0.0
        raise ValueError(f"unknown noise kind {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.sigma}
        if self.kind == "bounded_uniform":
            return {"kind": "bounded_uniform", "a": self.a, "b": self.b}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        kind = d["kind"]
        if kind == "gaussian":
            return cls.gaussian(d["sigma"])
        if kind == "bounded_uniform":
            return cls.bounded_uniform(d["a"], d["b"])
        if kind == "none":
            return cls.none()
        raise ValueError(f"unknown noise kind {kind!r}")


# ---------------------------------------------------------------- inputs


_INPUT_PARAMS = {
    "gaussian_iso": ("scale",),
    "laplace_radial": ("scale",),
    "pareto_radial": ("alpha", "r_min"),
    "sphere": ("radius",),
    "point_mass": ("x0",),
    "uniform_box": ("low", "high"),
}


@dataclass(frozen=True)
class InputDistribution:
    """Input law ``nu`` on R^n.

    ``gaussian_iso(scale)`` is N(0, scale^2 I). The ``*_radial`` kinds draw a
    uniform direction and an independent norm: Exponential with mean ``scale``
    for ``laplace_radial``, Pareto with tail ``(r / r_min)^-alpha`` for
    ``pareto_radial``. ``uniform_box`` is uniform on ``[low, high]^n``.
    """

    kind: str
    n: int
    scale: float = 1.0
    alpha: float = 1.0
    r_min: float = 1.0
    radius: float = 1.0
    x0: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 1.0

    @classmethod
    def gaussian_iso(cls, n: int, scale: float = 1.0):
        return cls("gaussian_iso", n, scale=float(scale))

    @classmethod
    def laplace_radial(cls, n: int, scale: float = 1.0):
        return cls("laplace_radial", n, scale=float(scale))

    @classmethod
    def pareto_radial(cls, n: int, alpha: float = 1.0, r_min: float = 1.0):
        return cls("pareto_radial", n, alpha=float(alpha), r_min=float(r_min))

    @classmethod
    def sphere(cls, n: int, radius: float):
        return cls("sphere", n, radius=float(radius))

    @classmethod
    def point_mass(cls, x0: Sequence[float]):
        x0 = tuple(float(v) for v in x0)
        return cls("point_mass", len(x0), x0=x0)

    @classmethod
    def uniform_box(cls, n: int, low: float, high: float):
        return cls("uniform_box", n, low=float(low), high=float(high))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "n": self.n}
        for p in _INPUT_PARAMS[self.kind]:
            v = getattr(self, p)
            d[p] = list(v) if isinstance(v, tuple) else v
        return d

    @classmethod
    def from_dict(cls, d: dict, n: int | None = None) -> "InputDistribution":
        kind = d["kind"]
        if kind not in _INPUT_PARAMS:
            raise ValueError(f"unknown input kind {kind!r}")
        if kind == "point_mass":
            return cls.point_mass(d["x0"])
        dim = d.get("n", n)
        if dim is None:
            raise ValueError("input distribution needs a dimension n")
        kwargs = {}
        for p in _INPUT_PARAMS[kind]:
            if p in d:
                kwargs[p] = float(d[p])
            elif p != "scale":
                raise ValueError(f"{kind} inputs need {p!r}")
        return cls(kind, int(dim), **kwargs)


def _directions(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    if n == 1:
        return rng.choice([-1.0, 1.0], size=(size, 1))
    g = rng.standard_normal((size, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_inputs(dist: InputDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` i.i.d. inputs; returns an array of shape ``(size, n)``."""
    n = dist.n
    if dist.kind == "gaussian_iso":
        return rng.normal(0.0, dist.scale, size=(size, n))
    if dist.kind == "point_mass":
        return np.tile(np.asarray(dist.x0, dtype=float), (size, 1))
    if dist.kind == "uniform_box":
        return rng.uniform(dist.low, dist.high, size=(size, n))
    if dist.kind == "laplace_radial":
        rho = rng.exponential(dist.scale, size=size)
    elif dist.kind == "pareto_radial":
        rho = dist.r_min * (1.0 + rng.pareto(dist.alpha, size=size))
    elif dist.kind == "sphere":
        rho = np.full(size, dist.radius)
    else:
        raise ValueError(f"unknown input kind {dist.kind!r}")
    return _directions(rng, size, n) * rho[:, None]


def sample_input(dist: InputDistribution, rng: np.random.Generator) -> np.ndarray:
    return sample_inputs(dist, rng, 1)[0]


def survival(dist: InputDistribution, radius: float) -> float:
    """Radial survival ``Pr[||x|| >= radius]`` in closed form."""
    if radius < 0:
        raise InvalidInputError(f"radius must be nonnegative, got {radius}")
    if radius == 0:
        return 1.0
    kind = dist.kind
    if kind == "gaussian_iso":
        return float(stats.chi.sf(radius / dist.scale, dist.n))
    if kind == "laplace_radial":
        return math.exp(-radius / dist.scale)
    if kind == "pareto_radial":
        if radius <= dist.r_min:
            return 1.0
        return (radius / dist.r_min) ** (-dist.alpha)
    if kind == "sphere":
        return 1.0 if radius <= dist.radius else 0.0
    if kind == "point_mass":
        return 1.0 if radius <= math.sqrt(math.fsum(v * v for v in dist.x0)) else 0.0
    if kind == "uniform_box" and dist.n == 1:
        lo, hi = dist.low, dist.high
        outside = max(0.0, min(hi, -radius) - lo) + max(0.0, hi - max(lo, radius))
        return outside / (hi - lo)
    raise UnsupportedQueryError(f"no closed-form survival for {kind} in n={dist.n}")


# ---------------------------------------------------------------- environment


@dataclass(frozen=True)
class EnvSpec:
    reward: RewardFunction
    noise: NoiseModel
    inputs: InputDistribution
    n: int = field(default=0)

    def __post_init__(self):
        if self.n == 0:
            object.__setattr__(self, "n", self.inputs.n)

    def commit_rewards(self, X: np.ndarray) -> np.ndarray:
        """True commit reward for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.reward.at_norm(np.linalg.norm(X, axis=1))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "reward": self.reward.to_dict(),
            "noise": self.noise.to_dict(),
            "inputs": self.inputs.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvSpec":
        n = d.get("n")
        inputs = InputDistribution.from_dict(d["inputs"], n=n)
        return cls(
            reward=RewardFunction.from_dict(d["reward"]),
            noise=NoiseModel.from_dict(d.get("noise", {"kind": "none"})),
            inputs=inputs,
            n=int(n) if n is not None else inputs.n,
        )


def reward_eval(env: EnvSpec, x: Sequence[float], y: int) -> float:
    if y == ABSTAIN:
        return 0.0
    rho = math.sqrt(math.fsum(float(v) * float(v) for v in x))
    return float(env.reward.at_norm(rho))


def observe(env: EnvSpec, x: Sequence[float], y: int, rng: np.random.Generator) -> float:
    return reward_eval(env, x, y) + float(env.noise.draw(rng))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self):
        if self.violations:
            raise EnvValidationError(self.violations)


def _sampled_lipschitz_ok(reward: RewardFunction, n: int, n_pairs: int = 10**4) -> bool:
    rng = np.random.default_rng(12345)
    scales = 10.0 ** rng.uniform(-3, 3, size=(n_pairs, 1))
    x = rng.normal(size=(n_pairs, n)) * scales
    xp = x + rng.normal(size=(n_pairs, n)) * scales * 10.0 ** rng.uniform(-3, 0, size=(n_pairs, 1))
    d = np.linalg.norm(x - xp, axis=1)
    keep = d > 0
    r, rp = reward.at_norm(np.linalg.norm(x, axis=1)), reward.at_norm(np.linalg.norm(xp, axis=1))
    # allow a few ulps of the reward values for cancellation in r - r'
    ulps = 8 * np.finfo(float).eps * np.maximum(np.abs(r), np.abs(rp))
    return bool(np.all(np.abs(r - rp)[keep] <= reward.L * (1 + 1e-9) * d[keep] + ulps[keep]))


def validate_env(env: EnvSpec) -> ValidationReport:
    """Check the model assumptions: sup r <= 1, r(0, 1) > 0 and the declared L."""
    out = []
    rw, nz, inp = env.reward, env.noise, env.inputs
    if env.n < 1:
        out.append(f"dimension must be >= 1, got {env.n}")
    if inp.n != env.n:
        out.append(f"input dimension {inp.n} does not match env dimension {env.n}")
    if not rw.L > 0:
        out.append(f"Lipschitz constant must be positive, got {rw.L}")

    if rw.kind == "radial_profile":
        radii, values = np.asarray(rw.radii), np.asarray(rw.values)
        if len(radii) < 1 or len(radii) != len(values):
            out.append("radial profile needs matching, nonempty radii and values")
            return ValidationReport(out)
        if radii[0] != 0 or np.any(np.diff(radii) <= 0):
            out.append("radial profile radii must start at 0 and strictly increase")
            return ValidationReport(out)
        sup = float(values.max())
        slope = float(np.max(np.abs(np.diff(values) / np.diff(radii)))) if len(radii) > 1 else 0.0
        if slope > rw.L * (1 + 1e-12):
            out.append(f"profile slope {slope:g} exceeds declared L={rw.L:g}")
    elif rw.kind in ("cone", "constant_one"):
        sup = rw.r0 if rw.kind == "cone" else 1.0
        if rw.L > 0 and not _sampled_lipschitz_ok(rw, max(env.n, 1)):
            out.append(f"sampled pairwise slope exceeds declared L={rw.L:g}")
    else:
        out.append(f"unknown reward kind {rw.kind!r}")
        return ValidationReport(out)

    if sup > 1:
        out.append(f"sup of commit reward is {sup:g} > 1")
    r_origin = float(rw.at_norm(0.0))
    if not r_origin > 0:
        out.append(f"commit reward at the origin is {r_origin:g}, must be > 0")

    if nz.kind == "gaussian" and nz.sigma < 0:
        out.append("gaussian noise sigma must be nonnegative")
    if nz.kind == "bounded_uniform" and (nz.a != -nz.b or nz.b <= 0):
        out.append(f"bounded_uniform noise must be symmetric about 0, got [{nz.a}, {nz.b}]")
    if nz.kind not in ("gaussian", "bounded_uniform", "none"):
        out.append(f"unknown noise kind {nz.kind!r}")

    if inp.kind == "pareto_radial" and not (inp.alpha > 0 and inp.r_min > 0):
        out.append("pareto_radial needs alpha > 0 and r_min > 0")
    if inp.kind in ("gaussian_iso", "laplace_radial") and not inp.scale > 0:
        out.append(f"{inp.kind} needs scale > 0")
    if inp.kind == "sphere" and not inp.radius >= 0:
        out.append("sphere radius must be nonnegative")
    if inp.kind == "uniform_box" and not inp.high > inp.low:
        out.append("uniform_box needs high > low")
    return ValidationReport(out)


# ---------------------------------------------------------------- bin means


def _density_1d(dist: InputDistribution):
    if dist.kind == "gaussian_iso":
        return stats.norm(scale=dist.scale).pdf
    if dist.kind == "laplace_radial":
        return stats.laplace(scale=dist.scale).pdf
    if dist.kind == "pareto_radial":
        a, rm = dist.alpha, dist.r_min

        def pdf(x):
            ax = abs(x)
            return 0.0 if ax < rm else 0.5 * a * rm**a * ax ** (-a - 1)

        return pdf
    if dist.kind == "uniform_box":
        lo, hi = dist.low, dist.high
        return lambda x: 1.0 / (hi - lo) if lo <= x <= hi else 0.0
    return None


def _cdf_1d(dist: InputDistribution, x: float) -> float:
    if dist.kind == "gaussian_iso":
        return float(special.ndtr(x / dist.scale))
    if dist.kind == "laplace_radial":
        return float(stats.laplace.cdf(x, scale=dist.scale))
    if dist.kind == "pareto_radial":
        if x <= -dist.r_min:
            return 0.5 * (-x / dist.r_min) ** (-dist.alpha)
        if x < dist.r_min:
            return 0.5
        return 1.0 - 0.5 * (x / dist.r_min) ** (-dist.alpha)
    if dist.kind == "uniform_box":
        return min(1.0, max(0.0, (x - dist.low) / (dist.high - dist.low)))
    raise UnsupportedQueryError(dist.kind)


def _in_bin(X: np.ndarray, key: BinKey, w: float) -> np.ndarray:
    lo = np.asarray(key, dtype=float) * w
    hi = (np.asarray(key, dtype=float) + 1) * w
    return np.all((X >= lo) & (X < hi), axis=1)


def _atoms(dist: InputDistribution) -> np.ndarray | None:
    if dist.kind == "point_mass":
        return np.asarray([dist.x0], dtype=float)
    if dist.kind == "sphere" and dist.n == 1:
        return np.asarray([[-dist.radius], [dist.radius]])
    return None


def _radial_sf(dist: InputDistribution, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if dist.kind == "gaussian_iso":
        return stats.chi.sf(rho / dist.scale, dist.n)
    if dist.kind == "laplace_radial":
        return np.exp(-rho / dist.scale)
    if dist.kind == "pareto_radial":
        return np.where(rho <= dist.r_min, 1.0, (np.maximum(rho, dist.r_min) / dist.r_min) ** (-dist.alpha))
    raise UnsupportedQueryError(dist.kind)


def _radial_isf(dist: InputDistribution, q: np.ndarray) -> np.ndarray:
    if dist.kind == "gaussian_iso":
        return stats.chi.isf(q, dist.n) * dist.scale
    if dist.kind == "laplace_radial":
        return -dist.scale * np.log(q)
    if dist.kind == "pareto_radial":
        return dist.r_min * q ** (-1.0 / dist.alpha)
    raise UnsupportedQueryError(dist.kind)


def _shell_sampler(dist: InputDistribution, key: BinKey, w: float, rng: np.random.Generator, budget: int = 5 * 10**7):
    """Sampler for ``nu`` conditioned on the bin, plus the radial shell mass.

    The norm is drawn from ``nu`` truncated to ``[rho_lo, rho_hi]`` (the bin's
    nearest and farthest distances from the origin) by inverting the radial
    survival function; draws whose direction leaves the bin are rejected.
    """
    lo = np.asarray(key, dtype=float) * w
    hi = lo + w
    rho_lo = float(np.linalg.norm(np.clip(0.0, lo, hi)))
    rho_hi = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
    if dist.kind == "sphere":
        if not rho_lo <= dist.radius <= rho_hi:
            raise UnreachableBinError(f"bin {key} misses the sphere")
        q_hi, q_lo = 1.0, 0.0

        def radii(size):
            return np.full(size, dist.radius)
    else:
        q_hi, q_lo = float(_radial_sf(dist, rho_lo)), float(_radial_sf(dist, rho_hi))
        if q_hi - q_lo < UNREACHABLE_PROBABILITY:
            raise UnreachableBinError(f"bin {key} has probability below {UNREACHABLE_PROBABILITY}")

        def radii(size):
            return _radial_isf(dist, rng.uniform(q_lo, q_hi, size=size))

    drawn = [0, 0]

    def draw(size):
        chunks, got = [], 0
        while got < size:
            m = max(4 * size, 10**5)
            X = _directions(rng, m, dist.n) * radii(m)[:, None]
            X = X[_in_bin(X, key, w)]
            drawn[0] += m
            drawn[1] += len(X)
            chunks.append(X)
            got += len(X)
            if drawn[1] == 0 and drawn[0] >= budget:
                raise UnreachableBinError(f"no samples landed in bin {key}")
        return np.concatenate(chunks)

    def mass():
        return (q_hi - q_lo) * drawn[1] / drawn[0]

    return draw, mass


def bin_probability(dist: InputDistribution, key: BinKey, w: float, seed: int = 0) -> float:
    """``Pr[x in bin]``; exact where a product or 1-D form exists, else Monte Carlo."""
    atoms = _atoms(dist)
    if atoms is not None:
        return float(np.mean(_in_bin(atoms, key, w)))
    if dist.kind in ("gaussian_iso", "uniform_box") or dist.n == 1:
        p = 1.0
        for k in key:
            p *= _cdf_1d(dist, (k + 1) * w) - _cdf_1d(dist, k * w)
        return p
    try:
        draw, mass = _shell_sampler(dist, key, w, np.random.default_rng(seed))
        draw(10**4)
    except UnreachableBinError:
        return 0.0
    return mass()


def _zigzag(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def _mc_mean(draw, f, precision: float, max_samples: int) -> float:
    total, total_sq, count = 0.0, 0.0, 0
    batch = 4096
    while True:
        v = f(draw(batch))
        total += float(v.sum())
        total_sq += float((v * v).sum())
        count += len(v)
        mean = total / count
        var = max(total_sq / count - mean * mean, 0.0)
        if count >= 1000 and math.sqrt(var / count) <= precision:
            return mean
        if count >= max_samples:
            return mean
        batch = min(max(batch, int(var / precision**2) - count + 1024), max_samples - count)


def bin_mean_oracle(
    env: EnvSpec,
    key: BinKey,
    w: float,
    precision: float = DEFAULT_ORACLE_PRECISION,
    seed: int = 0,
    max_samples: int = 10**7,
) -> float:
    """Conditional mean commit reward ``E[r(x, 1) | x in bin]`` under ``nu``.

    Uses exact atoms or 1-D quadrature where available; otherwise conditional
    Monte Carlo with standard error at most ``precision``.

    Raises:
        UnreachableBinError: if the bin has probability below 1e-12.
    """
    dist = env.inputs
    key = tuple(int(k) for k in key)
    atoms = _atoms(dist)
    if atoms is not None:
        inside = atoms[_in_bin(atoms, key, w)]
        if len(inside) == 0:
            raise UnreachableBinError(f"bin {key} has zero probability")
        return float(np.mean(env.commit_rewards(inside)))

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(_zigzag(k) for k in key)))

    if dist.kind == "gaussian_iso" or dist.n == 1:
        prob = bin_probability(dist, key, w)
        if prob < UNREACHABLE_PROBABILITY:
            raise UnreachableBinError(f"bin {key} has probability {prob:.3g}")
        if env.reward.kind == "constant_one":
            return 1.0
        if dist.n == 1:
            a, b = key[0] * w, (key[0] + 1) * w
            pdf = _density_1d(dist)
            kinks = set()
            for r in env.reward.breakpoints() + ((dist.r_min,) if dist.kind == "pareto_radial" else ()):
                kinks |= {r, -r}
            if dist.kind == "uniform_box":
                kinks |= {dist.low, dist.high}
            pts = sorted(p for p in kinks if a < p < b)
            f = lambda x: float(env.reward.at_norm(abs(x))) * pdf(x) / prob
            val, _ = integrate.quad(f, a, b, points=pts or None, epsabs=1e-12, epsrel=1e-10, limit=200)
            return float(val)
        lo = np.asarray(key, dtype=float) * w / dist.scale
        hi = lo + w / dist.scale
        tn = stats.truncnorm(lo, hi, scale=dist.scale)

        def draw(size):
            return tn.rvs(size=(size, dist.n), random_state=rng)

        return _mc_mean(draw, env.commit_rewards, precision, max_samples)

    # radial law in n >= 2: draw the norm from nu restricted to the bin's
    # radial shell, a uniform direction, and keep the draws inside the bin
    draw, _ = _shell_sampler(dist, key, w, rng)
    if env.reward.kind == "constant_one":
        return 1.0
    return _mc_mean(draw, env.commit_rewards, precision, max_samples)
