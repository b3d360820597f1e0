"""
The classical pair with constant coefficients
=============================================

With W identically one, f = sum z^{q^j} and g = sum z^{q^{j+1/2}} satisfy
|f'(z)| + |g'(z)| >= c / (1 - |z|).  The certificate below reports the
attainable constant on every interval I_k, the angle-free bound and the
scale that turns the sum into an honest lower bound with constant 1.
"""

# %%
from growthbound import CertGrid, DecayFunction, build_bloch_pair, certify_bloch

one = DecayFunction.constant_one()
pair = build_bloch_pair(one, q=100, J=8)
report = certify_bloch(pair, one, grid=CertGrid((1, 6)))

# %% Worst record of each kind
for name in ("f.I", "f.III", "f.II+III", "f.floor", "f.lower", "f.lower_sqrt_q", "g.lower"):
    print(report.worst(name).line())

# The "lower" record is informational here: the ratio |f'|(1-|z|) dips to
# about 0.09 near the right end of I_k, where 1/(1-|z|) is q^{k+1/2} rather
# than q^k.  The weaker constant 1/(8 sqrt q) is certified instead.

# %%
print(f"\nscale for constant 1: {report.scale:.4f}   overall: {'PASS' if report.passed else 'FAIL'}")
