"""
Weights and their supporting-line envelopes
===========================================

A radial weight omega is described through u(x) = -log omega(e^x).  When u is
convex, 1/omega is the upper envelope of power functions a r^beta; the
envelope module picks a sparse chain of those lines, separated by a gap h.
"""

# %%
import numpy as np

from growthbound import RadialWeight, build_envelope, check_log_convex, verify_envelope

# %% Log-convexity on a grid of x = log r
grid = np.linspace(-3.0, -1e-3, 400)
for w in (RadialWeight.power(1), RadialWeight.power(2), RadialWeight.exponential(1, 1)):
    rep = check_log_convex(w, grid)
    print(f"{w.describe():28s} convex={rep.passed}  min second difference {rep.min_second_difference:.3e}")

# A table weight with a strong oscillation in log(1/(1-r)) is not log-convex,
# and the checker reports the offending triple of grid points.
r = 1 - np.geomspace(0.96, 1e-9, 2000)
wavy = RadialWeight.table(r, (1 - r) / (2 + np.cos(2 * np.log(1 / (1 - r)))))
print("oscillating table:", check_log_convex(wavy, grid).violation)

# %% The envelope for omega(r) = 1 - r out to 1 - r = 1e-100
w = RadialWeight.power(1)
env = build_envelope(w, h=8.0, x0=-0.1, delta_max=1e-100)
print(f"\n{env.K} segments, annulus {env.k_cover} reaches r_max")
print(" k   1 - t_k        beta_k         n_k")
for s, d in zip(env.segments, env.delta[1:]):
    print(f"{s.k:2d}   {d:.3e}   {s.beta:.6e}   {s.n}")

# %% Every property of the chain, checked on 2000 radii
print()
print(verify_envelope(env, w).to_text())

# %% The plain-text table round-trips exactly
print(env.to_text().splitlines()[:9])
