"""Demand environments: expected demand, stochastic realization, oracle prices.

Two concrete environments are provided:

* :class:`LinearDemandEnv` - the linear demand model with additive uniform
  noise used for the table/figure reproductions (d=2, prices in [0.5, 4.5]).
* :class:`AdversarialEnv` - the Bernoulli family indexed by a bit vector nu
  over a hypercube partition, whose optimal price has a known closed form.

Environments are immutable after construction; all randomness comes from
caller-supplied streams, so they can be shared read-only across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import HypercubePartition, cube_index, cube_index_many
from .prng import RngStream


class DemandEnvironment:
    """Contract shared by all environments.

    Subclasses define ``d``, price bounds ``p_lo``/``p_hi``, a revenue bound
    ``r_max`` (max attainable p*y, used by sensitivity-correct noise modes),
    and the four operations below.
    """

    d: int
    p_lo: float
    p_hi: float
    r_max: float
    name: str

    def sample_context(self, stream: RngStream, size: int | None = None):
        """Draw x ~ U[0,1]^d; shape (d,) or (size, d)."""
        if size is None:
            return stream.unit(self.d)
        return stream.unit((size, self.d))

    def mean_demand(self, p, x):
        raise NotImplementedError

    def mean_revenue(self, p, x):
        """f(p, x) = p * E[y | p, x]; vectorized over leading axes."""
        return np.asarray(p) * self.mean_demand(p, x)

    def oracle_price(self, x):
        raise NotImplementedError

    def realize_demand(self, p, x, stream: RngStream):
        raise NotImplementedError

    def _check_price(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < self.p_lo - 1e-12) or np.any(p > self.p_hi + 1e-12):
            raise ValueError(f"price outside [{self.p_lo}, {self.p_hi}]")

    def _check_context(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("context coordinates must lie in [0,1]")


@dataclass(frozen=True)
class LinearDemandEnv(DemandEnvironment):
    """E[y | p, x] = th0 + th1 x1 + th2 x2 + th3 p, plus U[-w, w] noise."""

    theta: tuple = (0.4, 0.6, 0.6, -0.2)
    noise_half_width: float = 0.1
    p_lo: float = 0.5
    p_hi: float = 4.5
    d: int = 2
    name: str = "linear"

    def __post_init__(self):
        th0, th1, th2, th3 = self.theta
        if not th3 < 0:
            raise ValueError(f"demand must slope down: theta3 < 0, got {th3}")
        # interior maximizer at every corner of the context square
        for x1 in (0.0, 1.0):
            for x2 in (0.0, 1.0):
                p_star = -(th0 + th1 * x1 + th2 * x2) / (2 * th3)
                if not self.p_lo < p_star < self.p_hi:
                    raise ValueError(
                        f"unconstrained optimal price {p_star:.4f} at corner ({x1},{x2}) "
                        f"falls outside ({self.p_lo}, {self.p_hi})")

    @property
    def r_max(self) -> float:
        # max over p in [p_lo, p_hi], x in corners of p*(mean demand + noise bound)
        th0, th1, th2, th3 = self.theta
        a = th0 + th1 + th2 + self.noise_half_width
        ps = np.linspace(self.p_lo, self.p_hi, 2001)
        return float(np.max(ps * (a + th3 * ps)))

    def mean_demand(self, p, x):
        self._check_price(p)
        self._check_context(x)
        x = np.asarray(x, dtype=float)
        th0, th1, th2, th3 = self.theta
        return th0 + th1 * x[..., 0] + th2 * x[..., 1] + th3 * np.asarray(p)

    def oracle_price(self, x):
        self._check_context(x)
        x = np.asarray(x, dtype=float)
        th0, th1, th2, th3 = self.theta
        raw = -(th0 + th1 * x[..., 0] + th2 * x[..., 1]) / (2 * th3)
        return np.clip(raw, self.p_lo, self.p_hi)

    def realize_demand(self, p, x, stream: RngStream):
        w = self.noise_half_width
        if w == 0.0:
            return float(self.mean_demand(p, x))
        return float(self.mean_demand(p, x) + stream.uniform(-w, w))

    def demand_noise(self, stream: RngStream, size: int):
        """Pre-drawn additive noise for a whole episode (one draw per period)."""
        w = self.noise_half_width
        if w == 0.0:
            return np.zeros(size)
        return stream.uniform(-w, w, size=size)


def boundary_distance(part: HypercubePartition, x):
    """Euclidean distance from x to the boundary of its containing cube.

    For a point inside an axis-aligned box this is the smallest per-axis
    face distance; it is 0 on the boundary.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("context coordinates must lie in [0,1]")
    m, h = part.m, part.h
    digits = np.minimum((x * m).astype(np.int64), m - 1)
    lo = digits * h
    per_axis = np.minimum(x - lo, lo + h - x)
    return float(np.min(per_axis, axis=-1)) if x.ndim == 1 else np.min(per_axis, axis=-1)


def boundary_distance_many(part: HypercubePartition, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    m, h = part.m, part.h
    digits = np.minimum((X * m).astype(np.int64), m - 1)
    lo = digits * h
    return np.min(np.minimum(X - lo, lo + h - X), axis=-1)


@dataclass(frozen=True)
class AdversarialEnv(DemandEnvironment):
    """Bernoulli demand 2/3 - p/2 + nu_j (1/3 - p/2) dist(x, cube boundary)."""

    partition: HypercubePartition = field(default_factory=lambda: HypercubePartition(d=2, m=2))
    nu: tuple = ()
    p_lo: float = 0.0
    p_hi: float = 1.0
    name: str = "adversarial"

    def __post_init__(self):
        nu = tuple(int(b) for b in self.nu)
        if len(nu) != self.partition.J:
            raise ValueError(f"nu must have one bit per cube ({self.partition.J}), got {len(nu)}")
        if any(b not in (0, 1) for b in nu):
            raise ValueError("nu must be a 0/1 vector")
        object.__setattr__(self, "nu", nu)

    @property
    def d(self) -> int:
        return self.partition.d

    @property
    def r_max(self) -> float:
        return 1.0

    def mean_demand(self, p, x):
        self._check_price(p)
        self._check_context(x)
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        nu_arr = np.asarray(self.nu)
        if x.ndim == 1:
            bit = nu_arr[cube_index(self.partition, x)]
            dist = boundary_distance(self.partition, x)
        else:
            bit = nu_arr[cube_index_many(self.partition, x)]
            dist = boundary_distance_many(self.partition, x)
        return 2.0 / 3.0 - p / 2.0 + bit * (1.0 / 3.0 - p / 2.0) * dist

    def oracle_price(self, x):
        """Closed form: 2/3 on nu_j = 0 cubes, shifted down by the boundary
        distance term on nu_j = 1 cubes."""
        self._check_context(x)
        x = np.asarray(x, dtype=float)
        nu_arr = np.asarray(self.nu)
        if x.ndim == 1:
            bit = nu_arr[cube_index(self.partition, x)]
            dist = boundary_distance(self.partition, x)
        else:
            bit = nu_arr[cube_index_many(self.partition, x)]
            dist = boundary_distance_many(self.partition, x)
        return 2.0 / 3.0 - bit * dist / (3.0 * (1.0 + dist))

    def realize_demand(self, p, x, stream: RngStream):
        lam = float(self.mean_demand(p, x))
        return float(stream.unit() < lam)


def lambda_nu(env: AdversarialEnv, p, x):
    """Mean Bernoulli demand of the adversarial family."""
    return env.mean_demand(p, x)


def check_assumptions(env: DemandEnvironment, grid_resolution: int = 201,
                      contexts_per_cube: int = 64, cubes_per_axis: int = 4,
                      seed: int = 0) -> dict:
    """Numerical audit of the regularity assumptions; report-only.

    Checks, per context cube: strong concavity of the cube-averaged revenue
    curve (negative second difference bounded away from 0 and above), and a
    global Lipschitz estimate of f in (p, x).  Returns measured constants
    and pass/fail flags; nothing is raised.
    """
    part = HypercubePartition(d=env.d, m=cubes_per_axis)
    stream = RngStream(seed, "assumption-check")
    ps = np.linspace(env.p_lo, env.p_hi, grid_resolution)
    dp = ps[1] - ps[0]
    second_diffs = []
    for j in range(part.J):
        lo, hi = part.cube_bounds(j)
        xs = lo + (hi - lo) * stream.unit((contexts_per_cube, env.d))
        fbar = np.array([np.mean(env.mean_revenue(p, xs)) for p in ps])
        d2 = np.diff(fbar, 2) / dp**2
        second_diffs.append(d2)
    d2_all = np.concatenate(second_diffs)
    sigma_sq = float(-np.max(d2_all))   # weakest curvature
    c_sq = float(-np.min(d2_all))       # strongest curvature
    concave = bool(sigma_sq > 1e-9)

    # Lipschitz estimate for f over random pairs
    n = 2000
    xs = stream.unit((n, env.d))
    xs2 = np.clip(xs + stream.uniform(-0.05, 0.05, size=(n, env.d)), 0.0, 1.0)
    pvals = env.p_lo + (env.p_hi - env.p_lo) * stream.unit(n)
    p2 = np.clip(pvals + stream.uniform(-0.05, 0.05, size=n), env.p_lo, env.p_hi)
    num = np.abs(env.mean_revenue(pvals, xs) - env.mean_revenue(p2, xs2))
    den = np.abs(pvals - p2) + np.linalg.norm(xs - xs2, axis=-1)
    mask = den > 1e-9
    lipschitz = float(np.max(num[mask] / den[mask]))

    return {
        "concavity_pass": concave,
        "sigma_H_sq": sigma_sq,
        "C_H_sq": c_sq,
        "lipschitz_estimate": lipschitz,
        "price_bounds": (env.p_lo, env.p_hi),
    }
