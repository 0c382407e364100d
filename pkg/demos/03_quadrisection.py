"""Watching the quadrisection price search close in on an optimum.

A single context cube runs a 5-point price grid over its current interval.
Cycling the grid, the policy compares revenue at consecutive grid points;
three increasing values mean the maximizer is right of the first quartile
(cut the left quarter), three decreasing values mirror that on the right.
Each cut keeps a concave maximizer and shrinks the interval by 3/4.
"""

import math

from privbandit import CppqConfig, CppqPolicy, LinearDemandEnv, derive_stream

env = LinearDemandEnv()
x = (0.5, 0.5)
p_star = float(env.oracle_price(x))  # 2.5 for the default coefficients
print(f"true optimal price at x={x}: {p_star}")

# %% Noise-free policy on one cube, with a permissive cut threshold.
cfg = CppqConfig(T=2000, eps=math.inf, J_request=1, c1=1e-4, c1_prime=1e-4, c2=5.0)
policy = CppqPolicy(cfg, env, derive_stream(0, "demo/policy"))
noise = env.demand_noise(derive_stream(0, "demo/demand"), cfg.T)

for t in range(1, cfg.T + 1):
    p = policy.choose_price(x, t)
    y = float(env.mean_demand(p, x)) + noise[t - 1]
    for ev in policy.update(x, p, y, t):
        g = policy.price_grid(0)
        width = g.rho[4] - g.rho[0]
        inside = g.rho[0] <= p_star <= g.rho[4]
        print(f"t={ev.t:5d}  {ev.direction:9s}  epoch {ev.epoch:2d}  "
              f"interval [{g.rho[0]:.3f}, {g.rho[4]:.3f}]  "
              f"width {width:.4f}  contains p*: {inside}")

g = policy.price_grid(0)
print(f"\nfinal interval [{g.rho[0]:.4f}, {g.rho[4]:.4f}] around p* = {p_star}")
print(f"width = initial * (3/4)^{g.epoch - 1} = {4.0 * 0.75 ** (g.epoch - 1):.4f}")
