"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math

import mpmath as mp
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from growthbound import (
    CertGrid,
    DecayFunction,
    RadialWeight,
    build_envelope,
    build_growth_pair,
    build_vmoa_pair,
    certify_bloch,
    certify_growth,
    evaluate,
    nu_coefficients,
    remove_common_zeros,
    ru_coefficients,
    sequence_violations,
    verify_envelope,
)
from growthbound.cli import PRESETS, RunConfig, certify, construct, profile

SLACK = 1e-9


def _report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def vmoa_cert():
    pair = build_vmoa_pair(J=14)
    return certify_bloch(pair, DecayFunction.inverse_log(), grid=CertGrid((1, 6)))


@pytest.fixture(scope="module")
def reference_envelopes():
    out = []
    for w in (RadialWeight.power(1.0), RadialWeight.power(2.0), RadialWeight.exponential(1.0, 1.0)):
        out.append((w, build_envelope(w, 8.0, -0.1, r_max=1 - 1e-6, K_max=1000)))
    return out


def test_criterion_01_vmoa_coefficients():
    seq = ru_coefficients(DecayFunction.inverse_log(), q=100, J=8, offset=0)
    err = max(abs(a * j - 1.0) for j, a in enumerate(seq.values, 1))
    _report(1, err <= 1e-12, f"a_j = 1/j for j <= 8, max relative error {err:.2e}")


def test_criterion_02_little_bloch_lower_bound(vmoa_cert):
    worst = min(vmoa_cert.worst("f.lower").value, vmoa_cert.worst("g.lower").value)
    ok = worst >= 1 / 8 - SLACK and all(r.passed for r in vmoa_cert.select("f.lower") + vmoa_cert.select("g.lower"))
    _report(2, ok, f"min |s'|(1-|z|)/W over k = 1..6, f and g: {worst:.6f} >= 1/8")


def test_criterion_03_intermediate_estimates(vmoa_cert):
    i_min = min(vmoa_cert.worst(f"{w}.I").value for w in "fg")
    iii_max = max(vmoa_cert.worst(f"{w}.III").value for w in "fg")
    s_max = max(vmoa_cert.worst(f"{w}.II+III").value for w in "fg")
    ok = i_min >= 1 / 3 - SLACK and iii_max <= 0.1251 + SLACK and s_max <= 1 / 7 + SLACK
    _report(3, ok, f"I/A min {i_min:.4f} >= 1/3, III/A max {iii_max:.2e} <= 0.1251, (II+III)/A max {s_max:.4f} <= 1/7")


def test_criterion_04_envelope_properties(reference_envelopes):
    bad = []
    for w, env in reference_envelopes:
        rep = verify_envelope(env, w, n_points=2000)
        checks = {
            "I": rep["I"].value <= 1e-12,
            "II'": rep["II'"].passed,
            "III": rep["III"].value <= 0.5,
            "n_increasing": rep["n_increasing"].passed,
            "ratio": rep["exponent_ratio_max"].value <= 10 / 9,
        }
        bad += [f"{w.describe()}:{k}" for k, v in checks.items() if not v]
    detail = "power(1), power(2), exponential(1,1) at r_max = 1-1e-6: " + ("all hold" if not bad else ", ".join(bad))
    _report(4, not bad, detail)


def test_criterion_05_weighted_off_diagonal(reference_envelopes):
    worst, bad = 0.0, []
    for w, env in reference_envelopes:
        nu = nu_coefficients(DecayFunction.inverse_log(), x_seq=env.x)
        rec = verify_envelope(env, w, nu, n_points=2000)["IV"]
        worst = max(worst, rec.value)
        if not rec.passed:
            bad.append(w.describe())
    _report(5, not bad, f"max weighted off-diagonal ratio {worst:.3e} <= 1/2" + (f" (fails: {bad})" if bad else ""))


def _growth_cert(weight, **kw):
    decay = DecayFunction.inverse_log()
    env = build_envelope(weight, 8.0, -0.1, **kw)
    nu = nu_coefficients(decay, x_seq=env.x)
    pair, _ = remove_common_zeros(build_growth_pair(env, nu))
    return certify_growth(pair, weight, decay, env, nu)


def test_criterion_06_growth_two_sided():
    thr = 0.9 * math.exp(-16.0) / 5.0
    parts, ok = [], True
    for weight, kw in ((RadialWeight.power(1.0), dict(delta_max=1e-100)),
                       (RadialWeight.exponential(1.0, 1.0), dict(r_max=1 - 1e-6, K_max=1000))):
        rep = _growth_cert(weight, **kw)
        low, up = rep.worst("lower").value, rep.worst("upper").value
        inner = rep.worst("inner_disc_log_min").value
        ok &= low >= thr - SLACK and up <= 20 and inner > -math.inf
        parts.append(f"{weight.describe()}: min {low:.3e}, max {up:.3f}, inner log min {inner:.2f}")
    _report(6, ok, f"lower >= {thr:.3e}, upper <= 20; " + "; ".join(parts))


def _preset(name):
    cfg = RunConfig.from_text(PRESETS[name])
    cfg.validate()
    return cfg, construct(cfg)


def test_criterion_07_little_o_profiles():
    parts, ok = [], True
    for name in ("vmoa", "abakumov-doubtsov-little"):
        cfg, built = _preset(name)
        prof = profile(cfg, built)
        ok &= prof.monotone and prof.ratio <= 0.1
        parts.append(f"{name} ratio {prof.ratio:.3e} monotone={prof.monotone}")
    cfg, built = _preset("ramey-ullrich")
    skipped = profile(cfg, built) is None
    rep = certify(cfg, built)
    ok &= skipped and rep.passed and math.isfinite(rep.scale)
    parts.append(f"constant-one skipped, certified with scale {rep.scale:.3f}")
    _report(7, ok, "; ".join(parts))


def _random_table_decay(rng):
    n = int(rng.integers(5, 40))
    r = np.concatenate([[0.0], 1 - np.geomspace(0.9, 1e-12, n)])
    vals = np.exp(-np.concatenate([[0.0], np.cumsum(rng.uniform(0.0, 0.5, n))]))
    return DecayFunction.table(r, vals)


def test_criterion_08_sequence_properties():
    rng = np.random.default_rng(8)
    violations = 0
    for _ in range(100):
        w = _random_table_decay(rng)
        violations += len(sequence_violations(ru_coefficients(w, 100, int(rng.integers(2, 6))), w))
        x = np.sort(-np.geomspace(0.1, 1e-11, int(rng.integers(3, 30))))
        violations += len(sequence_violations(nu_coefficients(w, x_seq=x), w, rng=rng))
    _report(8, violations == 0, f"100 random table W instances, {violations} violations")


def _mp_value(series, delta, turns):
    r = 1 - mp.mpf(delta)
    t = mp.mpf(turns)
    return complex(mp.fsum(mp.e ** mp.mpf(lc) * r**n * mp.expjpi(2 * ((n * t) % 1))
                           for n, lc in zip(series.exponents, series.log_coeffs)))


def test_criterion_09_evaluation_accuracy():
    rng = np.random.default_rng(9)
    pair = build_vmoa_pair(J=8)
    deltas = 10 ** rng.uniform(-14, -0.3, 1000)
    turns = rng.uniform(0, 1, 1000)
    worst = 0.0
    with mp.workdps(40):
        for s in (pair.f, pair.g):
            got = evaluate(s, deltas, turns)
            for d, t, v in zip(deltas, turns, got):
                ref = _mp_value(s, d, t)
                worst = max(worst, abs(v - ref) / abs(ref))
    _report(9, worst <= 1e-10, f"2 x 1000 random points, delta >= 1e-14, max relative error {worst:.2e}")


def test_criterion_10_l2():
    worst = 0.0
    for J in range(1, 65):
        seq = ru_coefficients(DecayFunction.inverse_log(), q=100, J=J)
        worst = max(worst, math.fsum(a * a for a in seq.values))
    _report(10, worst <= 1.645, f"max_J<=64 sum a_j^2 = {worst:.6f} <= 1.645")
