import math

from hypothesis import given, settings, strategies as st
import mpmath as mp
import numpy as np
import pytest

from growthbound import (
    ArgumentError,
    DecayFunction,
    DomainError,
    SparseSeries,
    build_bloch_pair,
    build_growth_pair,
    build_vmoa_pair,
    eval_series,
    evaluate,
    evaluate_grid,
    log_abs_grid,
)
from growthbound.series import default_truncation


def mp_eval(series, delta, turns, deriv=False, dps=60):
    """Reference value with exact radius and angle, in ``dps`` digits."""
    with mp.workdps(dps):
        r = 1 - mp.mpf(delta)
        t = mp.mpf(turns) + mp.mpf(series.rotation)
        acc = mp.mpc(0)
        for n, lc in zip(series.exponents, series.log_coeffs):
            c = mp.e ** mp.mpf(lc)
            if deriv:
                if n == 0:
                    continue
                c, n = c * n, n - 1
            acc += c * r**n * mp.expjpi(2 * ((n * t) % 1))
        return complex(acc * series.scale)


def _close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def test_random_points_match_reference(rng):
    pair = build_vmoa_pair(J=8)
    deltas = 10 ** rng.uniform(-14, -0.5, 1000)
    turns = rng.uniform(0, 1, 1000)
    for s in (pair.f, pair.g):
        got = evaluate(s, deltas, turns)
        for d, t, v in zip(deltas, turns, got):
            assert _close(v, mp_eval(s, d, t), 1e-10)


def test_derivatives_match_reference(rng):
    pair = build_vmoa_pair(J=8)
    deltas = 10 ** rng.uniform(-14, -0.5, 200)
    turns = rng.uniform(0, 1, 200)
    got = evaluate(pair.f, deltas, turns, deriv=True)
    for d, t, v in zip(deltas, turns, got):
        assert _close(v, mp_eval(pair.f, d, t, deriv=True), 1e-10)


def test_growth_pair_matches_reference(growth_power1, rng):
    pair = growth_power1["pair"]
    x = growth_power1["env"].x
    deltas = np.concatenate([[1e-20, 1e-50, 1e-90], 10 ** rng.uniform(-95, -1, 30)])
    turns = rng.uniform(0, 1, deltas.size)
    for s in (pair.f, pair.g):
        got = evaluate(s, deltas, turns)
        for d, t, v in zip(deltas, turns, got):
            assert _close(v, mp_eval(s, d, t, dps=160), 1e-10)


def test_conjugate_symmetry():
    s = build_vmoa_pair(J=6).f
    a = evaluate(s, 1e-5, 0.123)
    b = evaluate(s, 1e-5, 1 - 0.123)
    assert abs(a - np.conj(b)) <= 1e-13 * abs(a)


def test_derivative_by_finite_difference():
    s = SparseSeries.from_coefficients([0, 3, 10], [0.5, 1.0, 2.0])
    z = 0.4 + 0.3j
    h = 1e-6
    fd = (eval_series(s, z + h) - eval_series(s, z - h)) / (2 * h)
    assert abs(eval_series(s, z, deriv=True) - fd) <= 1e-8
    assert eval_series(s, z) == pytest.approx(0.5 + z**3 + 2 * z**10, rel=1e-14)


def test_grid_agrees_with_pointwise():
    s = build_vmoa_pair(J=6).g
    d = np.geomspace(0.1, 1e-12, 7)
    t = np.array([0.0, 0.25, 0.618])
    grid = evaluate_grid(s, d, t)
    point = evaluate(s, d[:, None], t[None, :])
    assert np.allclose(grid, point, rtol=1e-13, atol=0)
    assert np.allclose(log_abs_grid(s, d, t), np.log(np.abs(grid)), rtol=1e-12)


def test_log_abs_survives_overflow():
    s = SparseSeries((10, 10**6), (800.0, 900.0))  # |s| itself would overflow
    vals = log_abs_grid(s, [1e-9], [0.1, 0.2])
    assert np.all(np.isfinite(vals))
    assert np.all(vals > 899.9) and np.all(vals < 900.0)


@pytest.mark.parametrize("z", [1.0, 1j, 2.0, 0.8 + 0.8j])
def test_domain_errors(z):
    with pytest.raises(DomainError):
        eval_series(build_vmoa_pair(J=4).f, z)


def test_delta_domain():
    s = build_vmoa_pair(J=4).f
    for bad in (0.0, -1e-3, 1.5, float("nan")):
        with pytest.raises(DomainError):
            evaluate(s, bad, 0.0)


def test_rotation_is_a_change_of_angle():
    s = build_vmoa_pair(J=5).f
    rot = s.rotated(0.3)
    assert rot.theta == pytest.approx(2 * math.pi * 0.3)
    assert evaluate(rot, 1e-4, 0.1) == pytest.approx(evaluate(s, 1e-4, 0.4), rel=1e-12)


def test_csv_round_trip():
    s = build_vmoa_pair(J=5).g.rotated(0.125)
    back, kind = SparseSeries.from_csv(s.to_csv("vmoa"))
    assert back == s and kind == "vmoa"


def test_csv_with_huge_coefficients():
    s = SparseSeries((0, 10**30), (5.0, 2000.0))
    back, _ = SparseSeries.from_csv(s.to_csv("growth"))
    assert back == s and ",inf," in s.to_csv()


def test_bloch_pair_structure():
    pair = build_bloch_pair(DecayFunction.inverse_log(), J=5)
    assert pair.f.exponents == tuple(100**j for j in range(1, 6))
    assert pair.g.exponents == tuple(10 * 100**j for j in range(1, 6))
    assert np.allclose(pair.f.coefficients, [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5], rtol=1e-14)
    assert pair.kind == "bloch" and pair.provenance["J"] == 5


def test_default_truncation_is_small_but_sufficient():
    J = default_truncation(100, 6)
    assert 7 <= J <= 9
    assert build_vmoa_pair().provenance["J"] == J


@pytest.mark.parametrize("q", [10, 3, 1])
def test_non_square_q_rejected(q):
    with pytest.raises(ArgumentError):
        build_bloch_pair(DecayFunction.inverse_log(), q=q, J=4)


def test_series_validation():
    with pytest.raises(ArgumentError):
        SparseSeries((3, 2), (0.0, 0.0))
    with pytest.raises(ArgumentError):
        SparseSeries((1,), (0.0, 0.0))
    with pytest.raises(ArgumentError):
        SparseSeries.from_coefficients([1, 2], [1.0, -1.0])
    with pytest.raises(ArgumentError):
        SparseSeries.from_coefficients([5, 8], [1.0, 1.0]).shifted(6)


def test_growth_pair_parity_and_shift(growth_power1):
    env, pair = growth_power1["env"], growth_power1["pair"]
    n = env.n
    assert pair.provenance["shift"] == n[0]
    assert pair.f.exponents[0] == 0
    assert pair.f.exponents == tuple(m - n[0] for m in n[0::2])
    assert pair.g.exponents == tuple(n[1::2])
    nu = np.asarray(growth_power1["nu"].values)
    assert np.allclose(pair.g.log_coeffs, np.log(nu[1::2]) + env.log_a[1::2], rtol=1e-14)


def test_growth_pair_needs_three_segments():
    from growthbound import RadialWeight, build_envelope

    env = build_envelope(RadialWeight.power(2), 8.0, -0.1, r_max=1 - 1e-6, guard=0)
    assert env.K < 3
    with pytest.raises(ArgumentError):
        build_growth_pair(env, [1.0] * env.K)


def test_growth_pair_length_mismatch(growth_power1):
    env = growth_power1["env"]
    with pytest.raises(ArgumentError):
        build_growth_pair(env, [1.0] * (env.K - 1))


@given(st.integers(1, 12), st.floats(1e-12, 0.5), st.floats(0, 1, exclude_max=True))
@settings(max_examples=60, deadline=None)
def test_single_term_modulus(n, delta, turns):
    s = SparseSeries.from_coefficients([n], [2.0])
    assert abs(evaluate(s, delta, turns)) == pytest.approx(2 * (1 - delta) ** n, rel=1e-12)


def test_dominant_term_on_annuli():
    # on I_k the k-th term of |z f'| exceeds the rest
    s = build_vmoa_pair(J=8).f
    for k in range(1, 7):
        d = np.geomspace(100.0**-k, 100.0 ** -(k + 0.5), 9)
        x = np.log1p(-d)
        L = s.log_terms(x, deriv=True) + x[None, :]
        assert np.all(np.argmax(L, axis=0) == k - 1)
