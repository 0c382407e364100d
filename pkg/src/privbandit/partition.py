"""Context-space hypercube partition and the 5-point quadrisection price grid.

The context space [0,1]^d is cut into m^d congruent cubes (m per axis);
each cube carries an arithmetic 5-point price grid over its current price
interval.  A "cut" keeps either the upper three quarters of the interval
(left-cut) or the lower three quarters (right-cut) and re-quartiles, so the
interval width contracts by a factor 3/4 per epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LEFT_CUT = "left-cut"
RIGHT_CUT = "right-cut"

# Guard against m**d blowing past what float indexing can address.
_MAX_CUBES = 2**62


@dataclass(frozen=True)
class HypercubePartition:
    """Equal partition of [0,1]^d into m^d axis-aligned cubes, row-major indexed."""

    d: int
    m: int

    @property
    def J(self) -> int:
        return self.m**self.d

    @property
    def h(self) -> float:
        return 1.0 / self.m

    def cube_bounds(self, j: int):
        """(lo, hi) corner vectors of cube j."""
        digits = self.digits(j)
        lo = digits * self.h
        return lo, lo + self.h

    def digits(self, j: int) -> np.ndarray:
        """Base-m digit expansion of j, most significant axis first."""
        if not 0 <= j < self.J:
            raise ValueError(f"cube index {j} outside [0, {self.J})")
        out = np.empty(self.d, dtype=np.int64)
        for i in range(self.d - 1, -1, -1):
            out[i] = j % self.m
            j //= self.m
        return out


def build_partition(d: int, J_request: int) -> HypercubePartition:
    """Smallest per-axis count m with m^d >= J_request cubes."""
    if d < 1 or J_request < 1:
        raise ValueError(f"need d >= 1 and J_request >= 1, got d={d}, J_request={J_request}")
    m = max(1, math.ceil(J_request ** (1.0 / d)))
    # float root can land one off in either direction
    while m > 1 and (m - 1) ** d >= J_request:
        m -= 1
    while m**d < J_request:
        m += 1
    if m**d > _MAX_CUBES:
        raise ValueError(f"partition too fine: {m}^{d} cubes overflows the index space")
    return HypercubePartition(d=d, m=m)


def cube_index(part: HypercubePartition, x) -> int:
    """Row-major index of the cube containing x; the top face clamps inward."""
    x = np.asarray(x, dtype=float)
    if x.shape != (part.d,):
        raise ValueError(f"context must have shape ({part.d},), got {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"context coordinates must lie in [0,1], got {x}")
    digits = np.minimum((x * part.m).astype(np.int64), part.m - 1)
    j = 0
    for c in digits:
        j = j * part.m + int(c)
    return j


def cube_index_many(part: HypercubePartition, X: np.ndarray) -> np.ndarray:
    """Vectorized cube_index over rows of X (shape (n, d))."""
    X = np.asarray(X, dtype=float)
    if np.any(X < 0.0) or np.any(X > 1.0):
        raise ValueError("context coordinates must lie in [0,1]")
    digits = np.minimum((X * part.m).astype(np.int64), part.m - 1)
    weights = part.m ** np.arange(part.d - 1, -1, -1, dtype=np.int64)
    return digits @ weights


@dataclass(frozen=True)
class PriceGrid:
    """Ascending 5-point quartile grid over one cube's current price interval."""

    rho: tuple  # 5 ascending prices
    epoch: int = 1
    pointer: int = 0  # time index of the last reset

    @property
    def width(self) -> float:
        return self.rho[4] - self.rho[0]


def init_price_grid(p_lo: float, p_hi: float) -> PriceGrid:
    """Quartile grid on [p_lo, p_hi], epoch 1."""
    if not p_lo < p_hi:
        raise ValueError(f"price bounds must satisfy p_lo < p_hi, got [{p_lo}, {p_hi}]")
    return PriceGrid(rho=_quartiles(p_lo, p_hi))


def shrink_grid(grid: PriceGrid, direction: str, now: int) -> PriceGrid:
    """Discard the bottom (left-cut) or top (right-cut) quarter and re-quartile."""
    if direction == LEFT_CUT:
        lo, hi = grid.rho[1], grid.rho[4]
    elif direction == RIGHT_CUT:
        lo, hi = grid.rho[0], grid.rho[3]
    else:
        raise ValueError(f"direction must be {LEFT_CUT!r} or {RIGHT_CUT!r}, got {direction!r}")
    return PriceGrid(rho=_quartiles(lo, hi), epoch=grid.epoch + 1, pointer=now)


def phase_index(t: int) -> int:
    """1-based position of period t in the 5-price cycle: 1,2,3,4,5,1,..."""
    if t < 1:
        raise ValueError(f"time period must be >= 1, got {t}")
    return (t - 1) % 5 + 1


def _quartiles(lo: float, hi: float) -> tuple:
    w = hi - lo
    return (lo, lo + 0.25 * w, lo + 0.5 * w, lo + 0.75 * w, hi)
