"""
Two functions with prescribed growth for a log-convex weight
============================================================

For omega(r) = 1 - r the envelope lines become the monomials of two series:
odd segments go to f (divided by its lowest power), even ones to g.  Scaling
by nu_k from W = 1/log(1/(1-r)) makes the pair little-o while keeping

    |f(z)| + |g(z)| >= c W-hat(|z|) / omega(|z|)  for t_2 <= |z| < 1.
"""

# %%
import numpy as np

from growthbound import (
    CertGrid,
    DecayFunction,
    RadialWeight,
    build_envelope,
    build_growth_pair,
    certify_growth,
    little_o_profile,
    nu_coefficients,
    remove_common_zeros,
)

weight = RadialWeight.power(1.0)
decay = DecayFunction.inverse_log()
env = build_envelope(weight, 8.0, -0.1, delta_max=1e-100)
nu = nu_coefficients(decay, x_seq=env.x)
print("nu_k:", np.round(nu.values, 4))

# %% Common zeros inside |z| <= t_2
pair, zeros = remove_common_zeros(build_growth_pair(env, nu))
print(zeros.to_text())
# f's zeros sit in one thin annulus where a single term of g dominates, so no
# rotation is needed.

# %% Two-sided bounds on every annulus up to 1 - 1e-100
rep = certify_growth(pair, weight, decay, env, nu, grid=CertGrid(radial=40, angles=64))
for name in ("lower", "upper", "parity_f", "parity_g", "reverse_triangle", "inner_disc_log_min", "env.IV"):
    print(rep.worst(name).line())
print(f"scale {rep.scale:.3e}, overall {'PASS' if rep.passed else 'FAIL'}")

# %% omega |s| decays: suffix maxima at 90 probes out to 1 - 1e-90
probes = np.geomspace(0.1, 1e-90, 90)
prof = little_o_profile([pair.f, pair.g], weight, probes, window_end=1e-100)
print(f"M(0.9) = {prof.M[0]:.3f}  M(1-1e-90) = {prof.M[-1]:.3e}  monotone={prof.monotone}  {prof.verdict}")
