"""A quick tour of the Laplace noise machinery.

Every random draw in this package comes from a named, splittable stream, so
any experiment can be replayed bit-for-bit from a root seed.  This script
samples Laplace noise, checks its moments, and demonstrates the density-ratio
bound that makes the mechanism differentially private.
"""

import numpy as np

from privbandit import derive_stream, laplace_from_uniform

# %% Named streams: same (seed, label) -> same draws, always.
s1 = derive_stream(123, "demo/noise")
s2 = derive_stream(123, "demo/noise")
print("identical streams agree:", np.array_equal(s1.laplace(1.0, size=5),
                                                 s2.laplace(1.0, size=5)))

# %% Inverse-CDF sampling: the quartiles land where the textbook says.
print("u=0.5  ->", laplace_from_uniform(0.5, 2.0))    # median: 0
print("u=0.75 ->", laplace_from_uniform(0.75, 2.0))   # -2 ln(0.5) = 1.386

# %% Moments of Lap(b): mean 0, variance 2 b^2.
b = 2.0
samples = derive_stream(7, "demo/moments").laplace(b, size=500_000)
print(f"mean {samples.mean():+.4f} (expect 0), "
      f"var {samples.var():.3f} (expect {2 * b * b})")

# %% The privacy guarantee, analytically.
# If a statistic moves by at most Delta when one record changes, releasing
# statistic + Lap(Delta/eps) keeps the density ratio between neighboring
# inputs below e^eps at every output point v.
eps, delta = 1.0, 2.0
b = delta / eps
x, x_prime = 0.3, 0.3 + delta
v = np.linspace(-20, 20, 4001)
log_ratio = (np.abs(v - x_prime) - np.abs(v - x)) / b
print(f"max log density ratio {log_ratio.max():.4f} <= eps = {eps}")
