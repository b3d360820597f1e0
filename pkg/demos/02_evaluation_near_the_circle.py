"""
Evaluating lacunary series very close to |z| = 1
================================================

Points are given by delta = 1 - |z| and an angle in turns, so radii such as
1 - 1e-90 are representable.  Phases of z^n are reduced exactly, magnitudes
are combined in the log domain and the sum is compensated.
"""

# %%
import math

import numpy as np

from growthbound import SparseSeries, build_vmoa_pair, eval_series, evaluate, log_abs_grid

pair = build_vmoa_pair(J=8)
f = pair.f
print("exponents:", f.exponents[:4], "...")
print("coefficients:", np.round(f.coefficients, 4))

# %% Against the naive complex power, which works only moderately near 1
z = 0.999 * np.exp(2j * np.pi * 0.3)
naive = sum(c * z**n for n, c in zip(f.exponents, f.coefficients))
print("\nnaive   ", naive)
print("stable  ", eval_series(f, z))

# %% Radii far beyond double precision in r itself
for delta in (1e-6, 1e-10, 1e-14):
    v = evaluate(f, delta, 0.123)
    print(f"delta={delta:.0e}  |f| = {abs(v):.6f}   |f'|(1-|z|) = {abs(evaluate(f, delta, 0.123, deriv=True)) * delta:.4f}")

# %% Overflowing sums are handled through log |s|
big = SparseSeries((10, 10**6), (800.0, 900.0))
print("\nlog|s| on a grid:", log_abs_grid(big, [1e-9, 1e-3], [0.0, 0.5]).round(3).tolist())
try:
    math.exp(900.0)
except OverflowError:
    print("while exp(900) itself is out of range for a double")
