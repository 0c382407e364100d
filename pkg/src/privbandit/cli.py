"""Command-line front end: experiment configs, reproduction presets, reports.

Subcommands
-----------
simulate       run a JSON-configured experiment grid, emit CSV + summary JSON
reproduce      run a built-in preset (table-cppq | table-lppq | slope-lppq)
privacy-check  analytic density-ratio audit of the local-DP recorder

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import harness
from .harness import NONPRIVATE, PolicySpec, aggregate, fit_loglog_slope, make_env, run_one
from .prng import RngStream, seed_from_env
from .svgplot import line_chart

CSV_HEADER = "policy,env,eps,T,J,rep,seed,regret,pct_regret,oracle_revenue,shrinks_total"

TABLE_T_GRID = (500, 2500, 12500, 62500)
TABLE_EPS_GRID = (10.0, 1.0, 0.1, 0.01)
DEFAULT_REPS = 30
DEFAULT_SEED = 20240001


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    env_kind: str = "linear"
    env_params: dict = field(default_factory=dict)
    policy_kind: str = "lppq"
    policy_preset: str = "experiment"
    policy_overrides: dict = field(default_factory=dict)
    J: int | None = None
    T_list: tuple = (500,)
    eps_list: tuple = (1.0,)
    reps: int = 1
    seed: int = DEFAULT_SEED
    sensitivity_mode: str = "unit-scale"
    include_nonprivate: bool = False


_TOP_KEYS = {"preset", "env", "policy", "T", "eps", "reps", "seed",
             "sensitivity_mode", "include_nonprivate"}
_POLICY_KEYS = {"kind", "preset", "J", "c1", "c1_prime", "c2", "kappa1", "kappa2"}


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a JSON config document; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig()

    preset = doc.get("preset")
    if preset is not None:
        if preset not in ("table-cppq", "table-lppq", "slope-lppq"):
            raise ConfigError(f"unknown preset {preset!r}")
        cfg.policy_kind = "cppq" if preset == "table-cppq" else "lppq"
        cfg.T_list = TABLE_T_GRID
        cfg.eps_list = TABLE_EPS_GRID
        cfg.reps = DEFAULT_REPS
        cfg.include_nonprivate = preset != "slope-lppq"

    env = doc.get("env", {"kind": "linear"})
    if not isinstance(env, dict) or "kind" not in env:
        raise ConfigError("env must be an object with a 'kind' field")
    cfg.env_kind = env["kind"]
    cfg.env_params = {k: v for k, v in env.items() if k != "kind"}

    policy = doc.get("policy")
    if policy is not None:
        if not isinstance(policy, dict):
            raise ConfigError("policy must be an object")
        unknown = set(policy) - _POLICY_KEYS
        if unknown:
            raise ConfigError(f"unknown policy keys: {sorted(unknown)}")
        cfg.policy_kind = policy.get("kind", cfg.policy_kind)
        if cfg.policy_kind not in ("cppq", "lppq", NONPRIVATE):
            raise ConfigError(f"unknown policy kind {cfg.policy_kind!r}")
        cfg.policy_preset = policy.get("preset", cfg.policy_preset)
        if cfg.policy_preset not in ("experiment", "theorem"):
            raise ConfigError(f"unknown policy preset {cfg.policy_preset!r}")
        cfg.J = policy.get("J")
        cfg.policy_overrides = {k: float(v) for k, v in policy.items()
                                if k in ("c1", "c1_prime", "c2", "kappa1", "kappa2")}

    if "T" in doc:
        cfg.T_list = tuple(_positive_int(v, "T") for v in _as_list(doc["T"], "T"))
    if "eps" in doc:
        cfg.eps_list = tuple(_parse_eps(v) for v in _as_list(doc["eps"], "eps"))
    if "reps" in doc:
        cfg.reps = _positive_int(doc["reps"], "reps")
    if "seed" in doc:
        cfg.seed = int(doc["seed"])
    if "sensitivity_mode" in doc:
        if doc["sensitivity_mode"] not in ("unit-scale", "sensitivity-correct"):
            raise ConfigError(f"unknown sensitivity_mode {doc['sensitivity_mode']!r}")
        cfg.sensitivity_mode = doc["sensitivity_mode"]
    if "include_nonprivate" in doc:
        cfg.include_nonprivate = bool(doc["include_nonprivate"])
    if not cfg.T_list or not cfg.eps_list:
        raise ConfigError("T and eps lists must be non-empty")
    return cfg


def _as_list(v, name):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{name} must be a non-empty list")
    return v


def _positive_int(v, name):
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(f"{name} entries must be positive integers, got {v!r}")
    return v


def _parse_eps(v):
    if v == "inf":
        return math.inf
    try:
        e = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"eps entries must be positive numbers or 'inf', got {v!r}")
    if not e > 0:
        raise ConfigError(f"eps entries must be positive, got {v!r}")
    return e


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.17g}"
    return str(v)


def _policy_specs(cfg: ExperimentConfig):
    """Expand the config into the (spec, label) list to run, in output order."""
    overrides = tuple(sorted(cfg.policy_overrides.items()))
    specs = []
    if cfg.include_nonprivate:
        specs.append(PolicySpec(kind=NONPRIVATE, preset=cfg.policy_preset,
                                J_request=cfg.J, sensitivity_mode=cfg.sensitivity_mode))
    if cfg.policy_kind == NONPRIVATE:
        if not cfg.include_nonprivate:
            specs.append(PolicySpec(kind=NONPRIVATE, preset=cfg.policy_preset,
                                    J_request=cfg.J, sensitivity_mode=cfg.sensitivity_mode))
    else:
        for eps in cfg.eps_list:
            specs.append(PolicySpec(kind=cfg.policy_kind, preset=cfg.policy_preset, eps=eps,
                                    J_request=cfg.J, sensitivity_mode=cfg.sensitivity_mode,
                                    overrides=overrides))
    return specs


def run_grid(cfg: ExperimentConfig, jobs: int = 1):
    """Run the whole (policy, eps, T, rep) grid; returns (records, aggregates)."""
    env = make_env(cfg.env_kind, **cfg.env_params)
    records = []
    aggregates = []
    from concurrent.futures import ProcessPoolExecutor
    tasks = [(spec, env, T, cfg.seed, rep)
             for spec in _policy_specs(cfg)
             for T in cfg.T_list
             for rep in range(cfg.reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(harness._run_one_args, tasks, chunksize=1))
    else:
        records = [run_one(*task) for task in tasks]
    # ordered fold per (spec, T) group
    group = cfg.reps
    for i in range(0, len(records), group):
        aggregates.append(aggregate(records[i:i + group]))
    return records, aggregates


def write_csv(records, path: str):
    lines = [CSV_HEADER]
    for r in records:
        pct = 100.0 * r.cumulative_regret / r.oracle_revenue
        lines.append(",".join([
            r.policy, r.env, _fmt(r.eps), str(r.T), str(r.J), str(r.rep), str(r.seed),
            _fmt(r.cumulative_regret), _fmt(pct), _fmt(r.oracle_revenue),
            str(r.shrinks_total),
        ]))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_summary(aggregates, path: str):
    doc = [{
        "policy": a.policy, "eps": "inf" if math.isinf(a.eps) else a.eps, "T": a.T,
        "reps": a.reps, "mean_regret": a.mean_regret, "stderr_regret": a.stderr_regret,
        "mean_pct_regret": a.mean_pct_regret, "stderr_pct_regret": a.stderr_pct_regret,
    } for a in aggregates]
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def format_table(aggregates, T_list) -> str:
    """Rows: Non-Private then descending eps; columns: the T grid."""
    rows = {}
    for a in aggregates:
        key = "Non-Private" if a.policy == NONPRIVATE or math.isinf(a.eps) else f"eps={_fmt(a.eps)}"
        rows.setdefault(key, {})[a.T] = a.mean_pct_regret

    def row_order(key):
        if key == "Non-Private":
            return (0, 0.0)
        return (1, -float(key.split("=")[1]))

    width = 12
    header = "".ljust(14) + "".join(f"T={T}".rjust(width) for T in T_list)
    lines = [header]
    for key in sorted(rows, key=row_order):
        cells = "".join(f"{rows[key].get(T, float('nan')):{width}.2f}" for T in T_list)
        lines.append(key.ljust(14) + cells)
    return "\n".join(lines)


def privacy_check(eps: float, trials: int, max_revenue: float = 1.0, seed: int = 0,
                  J: int = 8) -> dict:
    """Analytic density-ratio audit of the one-shot local-DP release.

    For random neighboring per-period records a, a' (one-hot, magnitude at
    most max_revenue) and random release points z, computes the log density
    ratio sum_j (|z_j - a'_j| - |z_j - a_j|) * eps/2 of the Lap(2/eps)
    mechanism and compares its maximum against the analytic bound
    eps * max_revenue.
    """
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    stream = RngStream(seed, "privacy-check")
    max_log_ratio = -math.inf
    worst_l1 = 0.0
    for _ in range(trials):
        j, jp = stream.integers(0, J, size=2)
        a = np.zeros(J)
        ap = np.zeros(J)
        a[j] = max_revenue * stream.unit()
        ap[jp] = max_revenue * stream.unit()
        z = stream.laplace(2.0 / eps, size=J) + a
        log_ratio = float(np.sum(np.abs(z - ap) - np.abs(z - a)) * eps / 2.0)
        max_log_ratio = max(max_log_ratio, log_ratio)
        worst_l1 = max(worst_l1, float(np.abs(a - ap).sum()))
    bound = eps * max_revenue
    return {
        "eps": eps,
        "trials": trials,
        "max_revenue": max_revenue,
        "max_log_ratio": max_log_ratio,
        "analytic_bound": bound,
        "worst_l1_sensitivity": worst_l1,
        "pass": max_log_ratio <= bound + 1e-9,
    }


def _cmd_simulate(args) -> int:
    try:
        with open(args.config) as f:
            doc = json.load(f)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: malformed config {args.config}:{exc.lineno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(doc)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    records, aggregates = run_grid(cfg, jobs=args.jobs)
    try:
        os.makedirs(args.out, exist_ok=True)
        write_csv(records, os.path.join(args.out, "runs.csv"))
        write_summary(aggregates, os.path.join(args.out, "summary.json"))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    print(format_table(aggregates, cfg.T_list))
    return 0


def _cmd_reproduce(args) -> int:
    which = args.which
    cfg = parse_config({"preset": which})
    cfg.reps = args.reps
    cfg.seed = args.seed if args.seed is not None else DEFAULT_SEED
    records, aggregates = run_grid(cfg, jobs=args.jobs)
    try:
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_csv(records, os.path.join(args.out, f"{which}.csv"))
            write_summary(aggregates, os.path.join(args.out, f"{which}-summary.json"))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    if which in ("table-cppq", "table-lppq"):
        print(f"Mean percentage regret, {cfg.reps} reps, seed {cfg.seed}")
        print(format_table(aggregates, cfg.T_list))
        return 0
    # slope-lppq: fitted slope per eps plus chart of ln(regret/ln T) vs ln T
    print(f"Fitted log-log slopes of regret/ln(T), {cfg.reps} reps, seed {cfg.seed}")
    series = {}
    for eps in cfg.eps_list:
        pts = [(a.T, a.mean_regret) for a in aggregates if a.eps == eps]
        slope = fit_loglog_slope(pts)
        print(f"  eps={_fmt(eps):>5}: slope {slope:.3f}")
        series[f"eps={_fmt(eps)}"] = [(math.log(T), math.log(r / math.log(T))) for T, r in pts]
    svg = line_chart(series, xlabel="ln T", ylabel="ln(regret / ln T)",
                     title="Cumulative regret scaling (local privacy)")
    out_dir = args.out or "."
    try:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "slope-lppq.svg")
        with open(path, "w") as f:
            f.write(svg)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"chart written to {path}")
    return 0


def _cmd_privacy_check(args) -> int:
    try:
        report = privacy_check(args.eps, args.trials, max_revenue=args.max_revenue,
                               seed=args.seed if args.seed is not None else 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if report["max_revenue"] > 1.0:
        print(f"WARNING: per-record revenue up to {report['max_revenue']:g} exceeds the "
              f"normalized range; Lap(2/eps) only guarantees a density-ratio bound of "
              f"exp({report['analytic_bound']:g}) here")
    status = "PASS" if report["pass"] else "FAIL"
    print(f"privacy-check eps={_fmt(args.eps)} trials={args.trials}: "
          f"max log-ratio {report['max_log_ratio']:.6f} <= bound {report['analytic_bound']:.6f} "
          f"[{status}]")
    return 0 if report["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privbandit",
        description="Privacy-preserving personalized pricing simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a JSON-configured experiment grid")
    p_sim.add_argument("--config", required=True, help="JSON config file")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--out", default="out")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("reproduce", help="run a built-in reproduction preset")
    p_rep.add_argument("which", choices=["table-cppq", "table-lppq", "slope-lppq"])
    p_rep.add_argument("--reps", type=int, default=DEFAULT_REPS)
    p_rep.add_argument("--seed", type=int, default=None)
    p_rep.add_argument("--jobs", type=int, default=1)
    p_rep.add_argument("--out", default=None)
    p_rep.set_defaults(func=_cmd_reproduce)

    p_priv = sub.add_parser("privacy-check", help="analytic local-DP density-ratio audit")
    p_priv.add_argument("--eps", type=float, required=True)
    p_priv.add_argument("--trials", type=int, default=10000)
    p_priv.add_argument("--max-revenue", type=float, default=1.0)
    p_priv.add_argument("--seed", type=int, default=None)
    p_priv.set_defaults(func=_cmd_privacy_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command in ("simulate", "reproduce"):
        env_seed = seed_from_env()
        if env_seed is not None:
            args.seed = env_seed
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
