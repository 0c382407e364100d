"""Locally-private parallel quadrisection pricing policy.

The locally-private variant privatizes each customer's contribution at the
recording step: the only artifact the policy retains of a period is the
vector z_t with z_{t,j} = 1{j = j_t} p_t y_t + Lap(2/eps), one independent
Laplace draw per cube.  Running per-slot sums of these z vectors, epoch
differenced against a snapshot taken at the last cut, drive the same
quadrisection cuts as the central policy - except that no (even privatized)
visit counts exist, so confidence widths use the raw period count
n_j = t - pointer_j instead.

With eps = inf the Laplace draws are skipped and the confidence width is
evaluated at unit eps: the width term covers both privacy and sampling
noise, and letting it vanish entirely would allow cuts on pure demand
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cppq import SENSITIVITY_CORRECT, UNIT_SCALE, ShrinkEvent
from .partition import (LEFT_CUT, RIGHT_CUT, PriceGrid, build_partition,
                        cube_index, phase_index)
from .prng import RngStream


@dataclass(frozen=True)
class LppqConfig:
    T: int
    eps: float
    J_request: int
    kappa1: float
    kappa2: float
    preset: str = "custom"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive (or inf), got {self.eps}")
        if self.J_request < 1:
            raise ValueError(f"J_request must be >= 1, got {self.J_request}")

    @classmethod
    def theorem(cls, T: int, eps: float, d: int = 2, J_request: int | None = None) -> "LppqConfig":
        if J_request is None:
            J_request = _default_J(T, eps, d)
        return cls(T=T, eps=eps, J_request=J_request,
                   kappa1=1.7 * math.sqrt(math.log(2 * T)),
                   kappa2=31.0 * math.log(T), preset="theorem")

    @classmethod
    def experiment(cls, T: int, eps: float, d: int = 2, J_request: int | None = None) -> "LppqConfig":
        if J_request is None:
            J_request = _default_J(T, eps, d)
        return cls(T=T, eps=eps, J_request=J_request,
                   kappa1=0.001 * math.sqrt(math.log(T)),
                   kappa2=0.1 * math.log(T), preset="experiment")


def _default_J(T: int, eps: float, d: int) -> int:
    if math.isfinite(eps):
        return math.ceil((eps * math.sqrt(T)) ** (d / (d + 2)))
    # noise-free fallback: the central policy's cube count
    return math.ceil(T ** (d / (d + 4)))


class LppqPolicy:
    """Single-owner mutable policy state; one instance per replication."""

    def __init__(self, config: LppqConfig, env, stream: RngStream,
                 sensitivity_mode: str = UNIT_SCALE, trace=None):
        if sensitivity_mode not in (UNIT_SCALE, SENSITIVITY_CORRECT):
            raise ValueError(f"unknown sensitivity mode {sensitivity_mode!r}")
        self.config = config
        self.env = env
        self.part = build_partition(env.d, config.J_request)
        J = self.part.J
        self.J = J
        self.noise_enabled = math.isfinite(config.eps)
        self.noise_scale = 2.0 / config.eps if self.noise_enabled else 0.0
        if sensitivity_mode == SENSITIVITY_CORRECT:
            self.noise_scale *= env.r_max
        self._eps_eff = config.eps if self.noise_enabled else 1.0
        self._stream = stream.child("ldp-noise")
        self._trace = trace  # optional callable receiving (t, z)
        self._r = np.zeros((5, J))
        self._snap = np.zeros((5, J))
        self._lo = np.full(J, float(env.p_lo))
        self._hi = np.full(J, float(env.p_hi))
        self._epoch = np.ones(J, dtype=np.int64)
        self._pointer = np.zeros(J, dtype=np.int64)
        self.shrink_count = np.zeros(J, dtype=np.int64)
        self._expected_t = 1

    def price_grid(self, j: int) -> PriceGrid:
        lo, hi = self._lo[j], self._hi[j]
        w = hi - lo
        return PriceGrid(rho=(lo, lo + 0.25 * w, lo + 0.5 * w, lo + 0.75 * w, hi),
                         epoch=int(self._epoch[j]), pointer=int(self._pointer[j]))

    def choose_price(self, x, t: int, j: int | None = None) -> float:
        if not 1 <= t <= self.config.T:
            raise ValueError(f"t={t} outside horizon [1, {self.config.T}]")
        if j is None:
            j = cube_index(self.part, x)
        k = phase_index(t)
        return self._lo[j] + (k - 1) / 4.0 * (self._hi[j] - self._lo[j])

    def record(self, x, p: float, y: float, t: int, j: int | None = None) -> np.ndarray:
        """Privatize one customer's record and fold it into the running sums.

        Returns the released vector z_t; z_t is the only artifact of
        (x, y, p) that reaches the stored state.
        """
        if t != self._expected_t:
            raise RuntimeError(f"records must arrive in order: expected t={self._expected_t}, got {t}")
        j_t = cube_index(self.part, x) if j is None else j
        z = self._stream.laplace(self.noise_scale, size=self.J) if self.noise_enabled \
            else np.zeros(self.J)
        z[j_t] += p * y
        self._apply(z, t)
        return z

    def _apply(self, z: np.ndarray, t: int):
        """State mutation from the privatized vector only."""
        self._expected_t = t + 1
        self._r[phase_index(t) - 1] += z
        if self._trace is not None:
            self._trace(t, z)

    def update(self, x, p: float, y: float, t: int, j: int | None = None) -> list:
        """record + shrink check; the common per-period driver entry point."""
        self.record(x, p, y, t, j=j)
        return self.maybe_shrink(t)

    def maybe_shrink(self, t: int) -> list:
        cfg = self.config
        hd = self.part.h ** self.part.d
        n = t - self._pointer
        r_hat = self._r - self._snap
        left_gap = np.minimum(r_hat[1] - r_hat[0], r_hat[2] - r_hat[1])
        right_gap = np.minimum(r_hat[2] - r_hat[3], r_hat[3] - r_hat[4])
        sqrt_n = np.sqrt(n)
        threshold = 3.0 * cfg.kappa1 / (self._eps_eff * hd * sqrt_n)
        scale = 5.0 * hd * n
        gate = n >= cfg.kappa2
        left = gate & (left_gap / scale > threshold)
        right = gate & (right_gap / scale > threshold) & ~left  # left cut wins
        events = []
        if left.any() or right.any():
            w = self._hi - self._lo
            self._lo = np.where(left, self._lo + 0.25 * w, self._lo)
            self._hi = np.where(right, self._hi - 0.25 * w, self._hi)
            cut = left | right
            self._epoch[cut] += 1
            self._pointer[cut] = t
            self.shrink_count[cut] += 1
            self._snap[:, cut] = self._r[:, cut]
            for j in np.flatnonzero(cut):
                events.append(ShrinkEvent(t=t, cube=int(j),
                                          direction=LEFT_CUT if left[j] else RIGHT_CUT,
                                          epoch=int(self._epoch[j])))
        return events
