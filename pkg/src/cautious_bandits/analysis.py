"""Schedules, the explicit finite-T regret bound, tail terms and exponent fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .environments import InputDistribution, survival
from .geometry import unit_ball_volume


class InsufficientDataError(ValueError):
    pass


def default_schedules(T: int, n: int, variant: str = "log", c_m: float | None = None) -> tuple[float, float]:
    """Bin side ``w = T^(-1/(n+2))`` and trusted radius ``m``.

    ``variant="log"`` gives ``m = ln T``; ``variant="power"`` gives ``m = T^c_m``
    with ``0 < c_m < 1``.
    """
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    w = float(T) ** (-1.0 / (n + 2))
    if variant == "log":
        m = math.log(T)
    elif variant == "power":
        if c_m is None or not 0 < c_m < 1:
            raise ValueError(f"power schedule needs 0 < c_m < 1, got {c_m}")
        m = float(T) ** c_m
    else:
        raise ValueError(f"unknown schedule variant {variant!r}")
    return w, m


def sigma_w(n: int, L: float, w: float, sigma: float) -> float:
    """Combined subgaussian proxy of observation noise and within-bin variation."""
    return math.sqrt(n * L * L * w * w + sigma * sigma)


def log_union_term(T: int) -> float:
    """``ln(2 T^4)``, computed without overflow."""
    return math.log(2.0) + 4.0 * math.log(T)


@dataclass(frozen=True)
class BoundBreakdown:
    lipschitz_term: float
    variance_term: float
    margin_term: float
    tail_term: float
    failure_term: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return {
            "bound_total": self.total,
            "lipschitz_term": self.lipschitz_term,
            "variance_term": self.variance_term,
            "margin_term": self.margin_term,
            "failure_term": self.failure_term,
            "tail_term": self.tail_term,
        }


def tail_term(dist: InputDistribution, T: int, m: float) -> float:
    return T * survival(dist, m)


def explicit_bound(config, dist: InputDistribution) -> BoundBreakdown:
    """Evaluate the fully explicit finite-T upper bound on expected regret.

    ``config`` needs ``n, L, sigma, T, c, w, m`` (an :class:`AgentConfig`).
    The failure term ``(1 + L R) / T`` charges the low-probability event on
    which some bin mean escapes its confidence interval.
    """
    n, L, T, c, w, m = config.n, config.L, config.T, config.c, config.w, config.m
    R = m + math.sqrt(n) * w
    v1 = unit_ball_volume(n)
    sw2 = sigma_w(n, L, w, config.sigma) ** 2
    lip = 2 * L * v1 * R ** (n + 1) / w**n
    var = 32 * v1 * sw2 * R**n * log_union_term(T) / (c * w ** (n + 1))
    margin = (3 * L * math.sqrt(n) + 1) * w * T
    tail = tail_term(dist, T, m)
    fail = (1 + L * R) / T
    return BoundBreakdown(lip, var, margin, tail, fail, lip + var + margin + tail + fail)


@dataclass(frozen=True)
class ScalingFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def fit_scaling_exponent(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least squares fit of ``ln regret = slope * ln T + intercept``.

    Points with nonpositive regret are dropped with a warning.
    """
    kept = []
    for T, reg in points:
        if reg > 0:
            kept.append((float(T), float(reg)))
        else:
            warnings.warn(f"dropping point T={T} with nonpositive regret {reg}", stacklevel=2)
    if len(kept) < 3:
        raise InsufficientDataError(f"need >= 3 positive points, have {len(kept)}")
    x = np.log([p[0] for p in kept])
    y = np.log([p[1] for p in kept])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(tuple(kept), float(slope), float(intercept), r2)
