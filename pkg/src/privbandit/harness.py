"""Episode driver, regret accounting, replication, and slope fitting.

Regret is accumulated in *expected* revenue, f(p*(x_t), x_t) - f(p_t, x_t),
not realized revenue: the realized demand draw only feeds the policy.  This
matches the regret definition and keeps Monte-Carlo variance down.

Replications are embarrassingly parallel: rep i draws every bit of
randomness from the stream (root_seed, "rep/i"), so results are identical
whether reps run in one process or many, and aggregation is an ordered fold
over rep index.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cppq import UNIT_SCALE, CppqConfig, CppqPolicy
from .env import AdversarialEnv, DemandEnvironment, LinearDemandEnv
from .lppq import LppqConfig, LppqPolicy
from .prng import RngStream, derive_stream

NONPRIVATE = "nonprivate"  # central policy with noise disabled


@dataclass
class RunRecord:
    """Accounting for one replication."""

    policy: str
    env: str
    T: int
    eps: float
    J: int
    seed: int
    rep: int
    cumulative_regret: float
    oracle_revenue: float
    realized_expected_revenue: float
    shrink_count: np.ndarray = field(repr=False, default=None)
    regret_path: np.ndarray | None = field(repr=False, default=None)

    @property
    def shrinks_total(self) -> int:
        return int(self.shrink_count.sum()) if self.shrink_count is not None else 0


def percentage_regret(rec: RunRecord) -> float:
    if not rec.oracle_revenue > 0:
        raise ArithmeticError("percentage regret undefined for non-positive oracle revenue")
    return 100.0 * rec.cumulative_regret / rec.oracle_revenue


@dataclass(frozen=True)
class PolicySpec:
    """Picklable recipe for building a policy inside a worker process."""

    kind: str  # "cppq" | "lppq" | "nonprivate"
    preset: str = "experiment"
    eps: float = math.inf
    J_request: int | None = None
    sensitivity_mode: str = UNIT_SCALE
    overrides: tuple = ()  # ((name, value), ...) applied on top of the preset

    def build_config(self, T: int, d: int):
        kind = "cppq" if self.kind == NONPRIVATE else self.kind
        eps = math.inf if self.kind == NONPRIVATE else self.eps
        cls = CppqConfig if kind == "cppq" else LppqConfig
        maker = getattr(cls, self.preset, None)
        if maker is None:
            raise ValueError(f"unknown preset {self.preset!r}")
        cfg = maker(T=T, eps=eps, d=d, J_request=self.J_request)
        if self.overrides:
            from dataclasses import replace
            cfg = replace(cfg, **dict(self.overrides), preset="custom")
        return cfg

    def build_policy(self, T: int, env: DemandEnvironment, stream: RngStream):
        cfg = self.build_config(T, env.d)
        if isinstance(cfg, CppqConfig):
            return CppqPolicy(cfg, env, stream, sensitivity_mode=self.sensitivity_mode)
        return LppqPolicy(cfg, env, stream, sensitivity_mode=self.sensitivity_mode)


def run_episode(policy, env: DemandEnvironment, T: int, stream: RngStream,
                keep_path: bool = False) -> tuple:
    """Drive one T-period episode; returns (prices, contexts, regret fields).

    The context and demand-noise streams are pre-drawn so the per-period
    loop only touches the policy.
    """
    policy_env = getattr(policy, "env", env)
    if policy_env.d != env.d:
        raise ValueError("policy and environment dimension mismatch")
    from .partition import cube_index_many
    X = env.sample_context(stream.child("context"), size=T)
    demand_stream = stream.child("demand")
    quadrisection = hasattr(policy, "part")  # our policies take precomputed cube ids
    js = cube_index_many(policy.part, X) if quadrisection else None
    linear = isinstance(env, LinearDemandEnv)
    adversarial = isinstance(env, AdversarialEnv)
    if linear:
        noise = env.demand_noise(demand_stream, T)
        th0, th1, th2, th3 = env.theta
        base = th0 + th1 * X[:, 0] + th2 * X[:, 1]  # demand minus the price term
    elif adversarial:
        from .env import boundary_distance_many
        unit = demand_stream.unit(T)
        env_bits = np.asarray(env.nu)[cube_index_many(env.partition, X)]
        env_dists = boundary_distance_many(env.partition, X)
    prices = np.empty(T)
    for i in range(T):
        t = i + 1
        x = X[i]
        if quadrisection:
            j = int(js[i])
            p = policy.choose_price(x, t, j=j)
        else:
            p = policy.choose_price(x, t)
        if linear:
            y = base[i] + th3 * p + noise[i]
        elif adversarial:
            lam = 2.0 / 3.0 - p / 2.0 + env_bits[i] * (1.0 / 3.0 - p / 2.0) * env_dists[i]
            y = float(unit[i] < lam)
        else:
            y = env.realize_demand(p, x, demand_stream)
        if quadrisection:
            policy.update(x, p, y, t, j=j)
        else:
            policy.update(x, p, y, t)
        prices[i] = p
    f_opt = env.mean_revenue(env.oracle_price(X), X)
    f_act = env.mean_revenue(prices, X)
    per_step = f_opt - f_act
    return prices, X, float(f_opt.sum()), float(f_act.sum()), (per_step if keep_path else None)


def run_one(spec: PolicySpec, env: DemandEnvironment, T: int, root_seed: int, rep: int,
            keep_path: bool = False) -> RunRecord:
    stream = derive_stream(root_seed, f"rep/{rep}")
    policy = spec.build_policy(T, env, stream.child("policy"))
    _, _, oracle, realized, path = run_episode(policy, env, T, stream, keep_path=keep_path)
    return RunRecord(
        policy=spec.kind, env=env.name, T=T,
        eps=math.inf if spec.kind == NONPRIVATE else spec.eps,
        J=policy.J, seed=root_seed, rep=rep,
        cumulative_regret=oracle - realized,
        oracle_revenue=oracle,
        realized_expected_revenue=realized,
        shrink_count=policy.shrink_count.copy(),
        regret_path=path,
    )


@dataclass
class AggregateResult:
    policy: str
    eps: float
    T: int
    reps: int
    mean_regret: float
    stderr_regret: float | None
    mean_pct_regret: float
    stderr_pct_regret: float | None


def _run_one_args(args):
    return run_one(*args)


def replicate(spec: PolicySpec, env: DemandEnvironment, T: int, reps: int,
              root_seed: int, jobs: int = 1) -> tuple:
    """Run `reps` independent episodes; returns (records, AggregateResult)."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    tasks = [(spec, env, T, root_seed, i) for i in range(reps)]
    if jobs > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one_args, tasks))
    else:
        records = [run_one(*task) for task in tasks]
    return records, aggregate(records)


def aggregate(records: list) -> AggregateResult:
    regs = np.array([r.cumulative_regret for r in records])
    pcts = np.array([percentage_regret(r) for r in records])
    n = len(records)
    stderr = None if n < 2 else float(np.std(regs, ddof=1) / math.sqrt(n))
    stderr_pct = None if n < 2 else float(np.std(pcts, ddof=1) / math.sqrt(n))
    first = records[0]
    return AggregateResult(policy=first.policy, eps=first.eps, T=first.T, reps=n,
                           mean_regret=float(regs.mean()), stderr_regret=stderr,
                           mean_pct_regret=float(pcts.mean()), stderr_pct_regret=stderr_pct)


def fit_loglog_slope(points) -> float:
    """Least-squares slope of ln(regret / ln T) against ln T."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two (T, regret) points")
    Ts = np.array([p[0] for p in points], dtype=float)
    regs = np.array([p[1] for p in points], dtype=float)
    if np.any(regs <= 0) or np.any(Ts <= 1):
        raise ValueError("slope fit needs positive regrets and T > 1")
    xs = np.log(Ts)
    ys = np.log(regs / np.log(Ts))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def make_env(kind: str, **kwargs) -> DemandEnvironment:
    """Environment factory shared by the CLI and tests."""
    if kind == "linear":
        return LinearDemandEnv(**kwargs)
    if kind == "adversarial":
        from .partition import build_partition
        d = kwargs.pop("d", 2)
        m = kwargs.pop("m", 2)
        part = build_partition(d, m**d)
        nu = kwargs.pop("nu", None)
        if nu is None:
            nu = (0,) * part.J
        return AdversarialEnv(partition=part, nu=tuple(nu), **kwargs)
    raise ValueError(f"unknown environment kind {kind!r}")
