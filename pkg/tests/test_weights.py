import math

from hypothesis import assume, given, settings, strategies as st
import numpy as np
import pytest

from growthbound import (
    ArgumentError,
    DecayFunction,
    DomainError,
    RadialWeight,
    check_log_convex,
    eval_log_weight,
    eval_weight,
    normalize_decay,
)
from growthbound.weights import check_radial_weight

GRID = np.linspace(-3.0, -0.01, 200)


def test_eval_weight_examples():
    assert eval_weight(RadialWeight.power(1), 0.0) == 1.0
    assert eval_weight(RadialWeight.power(2), 0.5) == pytest.approx(0.25, rel=1e-15)
    # scalar oracle: exp(-1 / (1 - 0.9))
    assert eval_weight(RadialWeight.exponential(1, 1), 0.9) == pytest.approx(math.exp(-1 / 0.1), rel=1e-12)


@pytest.mark.parametrize("r", [-0.1, 1.0, 1.5, float("nan")])
def test_eval_weight_domain(r):
    with pytest.raises(DomainError):
        eval_weight(RadialWeight.power(1), r)


def test_eval_log_weight_examples():
    assert eval_log_weight(RadialWeight.power(1), math.log(0.5)) == pytest.approx(math.log(2), rel=1e-15)
    assert eval_log_weight(RadialWeight.exponential(1, 1), math.log(0.9)) == pytest.approx(10.0, rel=1e-12)
    # x -> -inf: u ~ alpha e^x -> 0+
    v = eval_log_weight(RadialWeight.power(2), -40.0)
    assert 0 < v == pytest.approx(2 * math.exp(-40.0), rel=1e-9)


@pytest.mark.parametrize("x", [0.0, 0.5])
def test_eval_log_weight_domain(x):
    with pytest.raises(DomainError):
        eval_log_weight(RadialWeight.power(1), x)


@pytest.mark.parametrize(
    "weight",
    [RadialWeight.power(a) for a in (0.5, 1, 2)]
    + [RadialWeight.exponential(c, p) for c, p in ((1, 1), (2, 1), (1, 2))],
)
def test_builtin_families_log_convex(weight):
    rep = check_log_convex(weight, GRID, tol=1e-9)
    assert rep.passed and rep.violation is None


def test_second_difference_matches_analytic_oracle():
    # u'' = e^x / (1 - e^x)^2 for power(1); uniform grid second difference ~ u'' dx^2
    rep = check_log_convex(RadialWeight.power(1), GRID)
    dx = GRID[1] - GRID[0]
    assert rep.min_second_difference == pytest.approx(math.exp(-3.0) / (1 - math.exp(-3.0)) ** 2 * dx**2, rel=2e-2)


def _oscillating_table(freq):
    r = 1 - np.geomspace(0.96, 1e-9, 2000)
    omega = (1 - r) / (2 + np.cos(freq * np.log(1 / (1 - r))))
    return RadialWeight.table(r, omega)


def test_oscillating_table_fails_with_triple():
    rep = check_log_convex(_oscillating_table(2.0), GRID)
    assert not rep.passed
    i, j, k, xi, xj, xk = rep.violation
    assert (j, k) == (i + 1, i + 2) and xi < xj < xk
    assert rep.min_second_difference < -0.1


def test_slow_oscillation_is_still_log_convex():
    # with frequency 1 the oscillation is too weak to break convexity
    assert check_log_convex(_oscillating_table(1.0), GRID).passed


def test_check_log_convex_needs_three_points():
    with pytest.raises(ArgumentError):
        check_log_convex(RadialWeight.power(1), [-1.0, -0.5])


def test_table_weight_outside_range():
    w = RadialWeight.table([0.1, 0.5, 0.9], [0.9, 0.5, 0.1])
    with pytest.raises(DomainError):
        w.u(np.array([math.log(0.95)]))


def test_custom_weight_matches_power():
    w = RadialWeight.custom("d**1.5")
    x = np.linspace(-2, -1e-6, 50)
    assert np.allclose(w.u(x), RadialWeight.power(1.5).u(x), rtol=1e-12)
    assert np.allclose(w.du(x), RadialWeight.power(1.5).du(x), rtol=1e-5)


@given(st.floats(0.1, 5.0), st.lists(st.floats(0.0, 0.999999), min_size=2, max_size=30, unique=True))
@settings(max_examples=50)
def test_power_monotone_on_grids(alpha, rs):
    rs = np.sort(np.array(rs))
    assume(np.all(np.diff(rs) > 1e-9))  # below this the weights agree in double precision
    w = RadialWeight.power(alpha)
    vals = eval_weight(w, rs)
    assert np.all(np.diff(vals) < 0)
    x = np.log(rs[rs > 0])
    assert np.all(np.diff(eval_log_weight(w, x)) > 0)


@given(st.floats(0.2, 3.0), st.floats(0.5, 2.0))
@settings(max_examples=30)
def test_exponential_monotone(c, p):
    w = RadialWeight.exponential(c, p)
    rs = np.linspace(0, 0.6, 40)
    assert np.all(np.diff(eval_weight(w, rs)) < 0)


def test_radial_weight_admissibility():
    assert check_radial_weight(RadialWeight.power(1)) == []
    assert check_radial_weight(RadialWeight.exponential(1, 1)) == []
    assert check_radial_weight(RadialWeight.power(0.01))  # decays too slowly to pass the 1e-3 test


def test_normalize_constant_one_is_identity():
    w = normalize_decay(DecayFunction.constant_one())
    assert w.at_delta(np.geomspace(1, 1e-50, 10)).tolist() == [1.0] * 10


def test_normalize_clamped_inverse_log():
    # W = min(1, 2 / |log(1 - r)|): W(0) = 1, W(1 - e^-4) = 1/2
    w = normalize_decay(DecayFunction.inverse_log(scale=2.0))
    assert w.at(0.0) == 1.0
    assert w.at_delta(math.exp(-4.0)) == pytest.approx(0.5, rel=1e-15)


def test_normalize_table_divides_samples():
    r = np.array([0.0, 0.5, 0.9, 0.99])
    vals = np.array([4.0, 2.0, 1.0, 0.5])
    w = normalize_decay(DecayFunction.table(r, vals))
    assert np.allclose(w.at(r), vals / 4.0, rtol=1e-15)


@given(st.floats(0.5, 5.0))
def test_normalize_idempotent(scale):
    w1 = normalize_decay(DecayFunction.inverse_log(scale))
    w2 = normalize_decay(w1)
    d = np.geomspace(1.0, 1e-80, 50)
    assert np.allclose(w1.at_delta(d), w2.at_delta(d), rtol=1e-15, atol=0)


def test_decay_tends_to_zero():
    w = DecayFunction.inverse_log()
    assert w.at_delta(1e-300) < 0.002
    assert DecayFunction.power(0.5).at_delta(1e-10) == pytest.approx(1e-5)
