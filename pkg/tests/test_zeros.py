import math

import numpy as np
import pytest

from growthbound import (
    ArgumentError,
    FunctionPair,
    NumericalInstabilityError,
    PreconditionError,
    SparseSeries,
    build_vmoa_pair,
    dominance_map,
    evaluate,
    find_zeros,
    remove_common_zeros,
)

S = SparseSeries.from_coefficients


def _pair(f, g, radius=0.95):
    return FunctionPair(f, g, "growth", {"x_radius": math.log(radius)})


def test_toy_zeros_match_numpy_roots():
    f = S([0, 3], [1.0, 2.0])
    found = find_zeros(f, math.log(0.7), math.log(0.9))
    roots = np.roots([2, 0, 0, 1])
    assert len(found) == 3 and all(m == 1 for _, m in found)
    for z, _ in found:
        assert np.min(np.abs(roots - z)) < 1e-12


def test_zero_count_against_numpy_for_denser_polynomial():
    f = S([0, 2, 7, 11], [1.0, 3.0, 5.0, 0.5])
    found = find_zeros(f, -math.inf, math.log(0.99))
    roots = np.roots(np.array([0.5, 0, 0, 0, 5, 0, 0, 0, 0, 3, 0, 1.0]))
    inside = roots[np.abs(roots) <= 0.99]
    assert sum(m for _, m in found) == inside.size
    for z in inside:
        assert min(abs(z - w) for w, _ in found) < 1e-10


def test_degree_limit():
    with pytest.raises(NumericalInstabilityError):
        find_zeros(S([0, 1 << 20], [1.0, 1.0]), -1.0, -0.1)


def test_dominance_map_brackets_the_zero_radius():
    # zeros of 1 + 2 z^3 have modulus 2^(-1/3)
    m = dominance_map(S([0, 3], [1.0, 2.0]), math.log(0.95))
    assert len(m.suspects) == 1
    ann = m.suspects[0]
    assert ann.count == 3 and ann.contains(-math.log(2) / 3)
    assert m.origin == 0


def test_origin_multiplicity():
    m = dominance_map(S([5, 8], [1.0, 2.0]), math.log(0.95))
    assert m.origin == 5


def test_no_zeros_means_no_rotation():
    pair = _pair(S([0, 1], [1.0, 0.1]), S([0, 2], [1.0, 0.3]))
    out, rep = remove_common_zeros(pair)
    assert rep.method == "dominance" and rep.theta_turns == 0.0
    assert out.zero_report is rep


def test_common_zeros_are_rotated_away():
    f = S([0, 3], [1.0, 2.0])
    pair = _pair(f, f)
    out, rep = remove_common_zeros(pair, angle_grid=64)
    assert rep.method == "explicit" and len(rep.zeros) == 3
    assert rep.theta_turns != 0.0
    for z, _ in rep.zeros:
        assert abs(evaluate(f, 1 - abs(z), np.angle(z) / (2 * math.pi) % 1)) < 1e-10
        assert abs(evaluate(out.g, 1 - abs(z), np.angle(z) / (2 * math.pi) % 1)) >= rep.achieved_min * (1 - 1e-9)
    assert rep.achieved_min > 0.1


def test_both_vanishing_at_origin_is_rejected():
    pair = _pair(S([5, 8], [1.0, 2.0]), S([2, 4], [1.0, 1.0]))
    with pytest.raises(PreconditionError):
        remove_common_zeros(pair)


def test_only_growth_pairs():
    with pytest.raises(ArgumentError):
        remove_common_zeros(build_vmoa_pair(J=4))


def test_growth_pair_is_separated_by_dominance(growth_power1):
    rep = growth_power1["zeros"]
    assert rep.method == "dominance" and rep.theta_turns == 0.0
    assert rep.log_achieved_min > -math.inf
    # f (divided by z^{n_1}) has its zeros in one thin annulus, g none before t_2
    assert growth_power1["pair"].f.exponents[0] == 0
    counts = [c for c in rep.zero_counts if c[2]]
    assert len(counts) == 1
    assert rep.g_map.origin > 0 and rep.f_map.origin == 0


def test_report_text_lists_annuli(growth_power1):
    text = growth_power1["zeros"].to_text()
    assert "method = dominance" in text and "f_zero_annulus" in text
