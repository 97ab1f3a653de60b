"""Lattice discretization of R^n and the trusted-region membership test.

Cells are half-open cubes ``prod_i [k_i w, (k_i + 1) w)`` so that every point
belongs to exactly one cell. Trust is decided on the closed cube: a cell is
trusted when its closest point to the origin lies within radius ``m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BinKey = tuple[int, ...]

ENUMERATION_CAP = 10**7


class InvalidInputError(ValueError):
    pass


class EnumerationTooLargeError(RuntimeError):
    pass


def _floor_index(v: float, w: float) -> int:
    k = math.floor(v / w)
    # v / w can round across an integer; re-check against the cube faces
    if (k + 1) * w <= v:
        k += 1
    elif k * w > v:
        k -= 1
    return k


def bin_key(x: Sequence[float], w: float) -> BinKey:
    """Lattice index of the half-open cube of side ``w`` that contains ``x``."""
    if not w > 0:
        raise InvalidInputError(f"bin width must be positive, got {w}")
    key = []
    for v in x:
        v = float(v)
        if not math.isfinite(v):
            raise InvalidInputError(f"non-finite coordinate in {tuple(x)}")
        key.append(_floor_index(v, w))
    return tuple(key)


def bin_keys(X: np.ndarray, w: float) -> np.ndarray:
    """Vectorized :func:`bin_key` over the rows of ``X``; returns an int64 array."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("non-finite coordinate in input batch")
    K = np.floor(X / w)
    K = np.where((K + 1) * w <= X, K + 1, K)
    K = np.where(K * w > X, K - 1, K)
    return K.astype(np.int64)


def nearest_point_to_origin(key: Sequence[int], w: float) -> tuple[float, ...]:
    # clamp 0 into [k w, (k+1) w] per axis
    return tuple(max(k * w, min(0.0, (k + 1) * w)) for k in key)


@dataclass(frozen=True)
class TrustedRegion:
    """All cells of side ``w`` whose closed cube meets the ball of radius ``m``.

    ``R`` is the radius of the origin-centred ball that covers every such cell.
    """

    w: float
    m: float
    n: int
    R: float = field(init=False)

    def __post_init__(self):
        if not self.w > 0:
            raise InvalidInputError(f"w must be positive, got {self.w}")
        if not self.m >= 0:
            raise InvalidInputError(f"m must be nonnegative, got {self.m}")
        if self.n < 1:
            raise InvalidInputError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "R", self.m + math.sqrt(self.n) * self.w)


def is_trusted(key: Sequence[int], region: TrustedRegion) -> bool:
    p = nearest_point_to_origin(key, region.w)
    return math.sqrt(math.fsum(v * v for v in p)) <= region.m


def enumerate_trusted_bins(region: TrustedRegion, cap: int = ENUMERATION_CAP) -> set[BinKey]:
    """Materialize the trusted set. Only meant for analysis at small n.

    Raises:
        EnumerationTooLargeError: if the candidate box exceeds ``cap`` keys.
    """
    half = math.ceil(region.R / region.w)
    side = 2 * half + 2
    if side**region.n > cap:
        raise EnumerationTooLargeError(
            f"{side}^{region.n} candidate bins exceeds cap {cap}; use is_trusted instead"
        )
    ks = np.arange(-half - 1, half + 1)
    w = region.w
    near = np.maximum(ks * w, np.minimum(0.0, (ks + 1) * w))
    sq = near**2
    total = sq
    for _ in range(region.n - 1):
        total = np.add.outer(total, sq)
    hits = np.argwhere(np.sqrt(total) <= region.m)
    return {tuple(int(ks[i]) for i in row) for row in hits}


def unit_ball_volume(n: int) -> float:
    if n < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)
