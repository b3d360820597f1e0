"""Small numerical helpers: compensated sums, log-domain sums, exact phases."""

from fractions import Fraction
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def neumaier_sum(terms, axis=0):
    """Compensated (Neumaier) summation of ``terms`` along ``axis``.

    Works for real or complex arrays; the loop runs over the summation axis
    and is vectorised over everything else.
    """
    terms = np.moveaxis(np.asarray(terms), axis, 0)
    if terms.shape[0] == 0:
        return np.zeros(terms.shape[1:], dtype=terms.dtype)
    if np.iscomplexobj(terms):
        return neumaier_sum(terms.real) + 1j * neumaier_sum(terms.imag)
    s = terms[0].astype(float, copy=True)
    c = np.zeros_like(s)
    for t in terms[1:]:
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        c += np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    return s + c


def logsumexp(a, axis=0):
    """log(sum(exp(a))) along ``axis``; ``-inf`` entries are allowed."""
    a = np.asarray(a, dtype=float)
    if a.shape[axis] == 0:
        return np.full(np.delete(a.shape, axis), -np.inf)
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    s = neumaier_sum(np.exp(a - m_safe), axis=axis)
    with np.errstate(divide="ignore"):
        out = np.log(s) + np.squeeze(m_safe, axis=axis)
    return np.where(np.isfinite(np.squeeze(m, axis=axis)), out, np.squeeze(m, axis=axis))


def log_radius(delta):
    """x = log r for r = 1 - delta, accurate for tiny delta."""
    return np.log1p(-np.asarray(delta, dtype=float))


def delta_from_x(x):
    """delta = 1 - e^x, accurate for x close to 0."""
    return -np.expm1(np.asarray(x, dtype=float))


def log_delta_from_x(x):
    """log(1 - e^x), accurate at both ends (x -> 0- and x -> -inf)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.log(-np.expm1(np.minimum(x, -1e-300)))
        far = np.log1p(-np.exp(np.minimum(x, 0.0)))
    return np.where(x < -math.log(2.0), far, near)


def frac_turns(n, turns):
    """Fractional part of ``n * turns`` computed exactly.

    ``turns`` is a float (a dyadic rational) and ``n`` a possibly huge
    integer, so the product is reduced modulo 1 in integer arithmetic.
    Returns a float in [0, 1).
    """
    fr = Fraction(turns)
    return float(Fraction((int(n) * fr.numerator) % fr.denominator, fr.denominator))


def phase_matrix(exponents, turns):
    """Matrix of exact phase fractions, shape (len(exponents), len(turns))."""
    turns = np.atleast_1d(np.asarray(turns, dtype=float))
    out = np.empty((len(exponents), turns.size))
    fracs = [Fraction(float(t)) for t in turns]
    for i, n in enumerate(exponents):
        n = int(n)
        for j, fr in enumerate(fracs):
            out[i, j] = (n * fr.numerator % fr.denominator) / fr.denominator
    return out


def golden_turns(count, offset=0.0):
    """Quasi-uniform angles in turns (golden-ratio sequence), sorted.

    Angles with small dyadic denominators are useless for lacunary series
    (q**j * m / 64 is an integer for q = 100, j >= 3); golden-ratio angles
    have full 53-bit mantissas and give well spread exact phases.
    """
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    t = np.mod(offset + phi * np.arange(1, count + 1), 1.0)
    return np.sort(t)
