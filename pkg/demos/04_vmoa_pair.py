"""
A VMOA pair with little-Bloch lower bounds
==========================================

With W(r) = 1 / log(1/(1-r)) the recurrence gives a_j = 1/j, so the
coefficients are square summable.  The pair still satisfies

    |f'(z)| + |g'(z)| >= W(|z|) / (8 (1 - |z|)),

and the weighted derivative decays to zero along every radius.
"""

# %%
import math

import numpy as np

from growthbound import CertGrid, DecayFunction, build_vmoa_pair, certify_bloch, little_o_profile, ru_coefficients

w = DecayFunction.inverse_log()
seq = ru_coefficients(w, q=100, J=8)
print("a_j:", [f"{a:.4f}" for a in seq.values], seq.branches)
print("sum a_j^2 up to J = 64:", math.fsum(a * a for a in ru_coefficients(w, J=64).values))

# %% Certificate on I_1 .. I_6 and the complementary intervals
pair = build_vmoa_pair(J=14)
rep = certify_bloch(pair, w, grid=CertGrid((1, 6)))
for name in ("f.I", "f.III", "f.II+III", "f.lower", "g.lower", "f.reverse_triangle"):
    print(rep.worst(name).line())
print(f"scale {rep.scale:.4f}, overall {'PASS' if rep.passed else 'FAIL'}")

# %% The little-o profile: suffix maxima of (1 - |z|^2) |s'(z)|
probes = np.geomspace(0.1, 1e-22, 23)
prof = little_o_profile([pair.f, pair.g], None, probes, deriv=True)
for d, m in zip(probes[::4], prof.M[::4]):
    print(f"1 - r = {d:.0e}   M = {m:.4f}")
print(f"M(outermost)/M(0.9) = {prof.ratio:.4f}   -> {prof.verdict}")
