"""Sparse power series and the constructed function pairs.

Exponents are exact Python integers (they reach 10**100 for the growth
pairs) and coefficients are stored as logarithms.  Points are described by
``delta = 1 - |z|`` and an angle in *turns* (``arg z / 2 pi``); the phase of
``z**n`` is then ``frac(n * turns)``, which is reduced exactly in integer
arithmetic because a float angle is a dyadic rational.  Term moduli are
``exp(log c + n * log1p(-delta))`` and the terms are added with compensated
summation after factoring out the largest modulus.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from growthbound._numeric import TWO_PI, log_radius, neumaier_sum
from growthbound.coefficients import ru_coefficients
from growthbound.errors import ArgumentError, DomainError
from growthbound.weights import DecayFunction

__all__ = [
    "SparseSeries",
    "FunctionPair",
    "build_bloch_pair",
    "build_vmoa_pair",
    "build_growth_pair",
    "default_truncation",
    "eval_series",
    "evaluate",
    "evaluate_grid",
    "log_abs_grid",
]


@dataclass(frozen=True)
class SparseSeries:
    """scale * sum_j c_j (e^{i theta} z)^{n_j} with n_j strictly increasing."""

    exponents: tuple
    log_coeffs: tuple
    scale: float = 1.0
    rotation: float = 0.0  # theta in turns

    def __post_init__(self):
        if len(self.exponents) != len(self.log_coeffs):
            raise ArgumentError("exponents and coefficients differ in length")
        if any(b <= a for a, b in zip(self.exponents, self.exponents[1:])):
            raise ArgumentError("exponents must be strictly increasing")
        if self.exponents and self.exponents[0] < 0:
            raise ArgumentError("exponents must be non-negative")

    @classmethod
    def from_coefficients(cls, exponents, coefficients, scale=1.0, rotation=0.0):
        coefficients = [float(c) for c in coefficients]
        if any(not c > 0 for c in coefficients):
            raise ArgumentError("coefficients must be positive")
        return cls(tuple(int(n) for n in exponents), tuple(math.log(c) for c in coefficients), scale, rotation)

    @property
    def coefficients(self):
        return tuple(math.exp(c) for c in self.log_coeffs)

    @property
    def theta(self):
        """Rotation angle in radians."""
        return TWO_PI * self.rotation

    def __len__(self):
        return len(self.exponents)

    def rotated(self, turns):
        return replace(self, rotation=float(turns) % 1.0)

    def shifted(self, n0):
        """Divide by z**n0 (n0 must not exceed the smallest exponent)."""
        if self.exponents and n0 > self.exponents[0]:
            raise ArgumentError("cannot divide by a power larger than the lowest exponent")
        return replace(self, exponents=tuple(n - n0 for n in self.exponents))

    # -- log-domain pieces ---------------------------------------------------

    def _terms(self, deriv):
        """(exponent used for |z|, log of constant factor, exponent used for phase)."""
        out = []
        for n, lc in zip(self.exponents, self.log_coeffs):
            if deriv:
                if n == 0:
                    continue
                out.append((n - 1, lc + math.log(n), n - 1))
            else:
                out.append((n, lc, n))
        return out

    def log_terms(self, x, deriv=False):
        """Log moduli of the terms at log-radius ``x``, shape (terms, len(x)).

        Includes ``log(scale)``; independent of the angle.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        rows = []
        for m, lc, _ in self._terms(deriv):
            rows.append(np.full(x.shape, lc) if m == 0 else lc + float(m) * x)
        if not rows:
            return np.full((0, x.size), -np.inf)
        return np.array(rows) + math.log(self.scale)

    def phase_fracs(self, turns, deriv=False):
        """Exact phase fractions frac(m * (turns + rotation)), shape (terms, len(turns))."""
        turns = np.atleast_1d(np.asarray(turns, dtype=float))
        ms = tuple(m for m, _, _ in self._terms(deriv))
        return _phase_fracs(ms, float(self.rotation), tuple(turns.tolist())).copy()

    # -- serialization -------------------------------------------------------

    def to_csv(self, kind=""):
        """CSV with a ``# kind= scale= theta_turns=`` header line."""
        head = f"# kind={kind} scale={self.scale!r} theta_turns={self.rotation!r}"
        rows = [head, "exponent,coefficient,log_coefficient"]
        # the linear column overflows for large weights; the log column is authoritative
        for n, lc in zip(self.exponents, self.log_coeffs):
            c = math.exp(lc) if lc < 709.0 else math.inf
            rows.append(f"{n},{c:.17g},{lc:.17g}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("#").split())
        exps, lcs = [], []
        for line in lines[2:]:
            n, _c, lc = line.split(",")
            exps.append(int(n))
            lcs.append(float(lc))
        return cls(tuple(exps), tuple(lcs), float(meta["scale"]), float(meta["theta_turns"])), meta.get("kind", "")


@lru_cache(maxsize=256)
def _phase_fracs(ms, rotation, turns):
    rot = Fraction(rotation)
    fr = [Fraction(t) + rot for t in turns]
    out = np.empty((len(ms), len(fr)))
    for i, m in enumerate(ms):
        for j, f in enumerate(fr):
            out[i, j] = (m * f.numerator % f.denominator) / f.denominator
    return out


@dataclass
class FunctionPair:
    f: SparseSeries
    g: SparseSeries
    kind: str  # "bloch", "vmoa" or "growth"
    provenance: dict = field(default_factory=dict)
    zero_report: object = None


def _check_delta(delta):
    delta = np.asarray(delta, dtype=float)
    if np.any(~(delta > 0)) or np.any(delta > 1):
        raise DomainError("points must satisfy |z| < 1 (0 < delta <= 1)")
    return delta


def evaluate(series, delta, turns, deriv=False):
    """Values at the points (1 - delta) e^{2 pi i turns} (arrays broadcast pairwise)."""
    delta, turns = np.broadcast_arrays(np.asarray(delta, dtype=float), np.asarray(turns, dtype=float))
    shape = delta.shape
    delta = _check_delta(delta.ravel())
    turns = turns.ravel()
    L = series.log_terms(log_radius(delta), deriv)
    if L.shape[0] == 0:
        return np.zeros(shape, dtype=complex)
    P = series.phase_fracs(turns, deriv)
    shift = np.max(L, axis=0)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    terms = np.exp(L - shift[None, :]) * np.exp(1j * TWO_PI * P)
    out = neumaier_sum(terms, axis=0) * np.exp(shift)
    return out.reshape(shape)


def _grid_parts(series, delta, turns, deriv):
    delta = _check_delta(np.atleast_1d(delta))
    L = series.log_terms(log_radius(delta), deriv)  # (K, N)
    P = series.phase_fracs(turns, deriv)  # (K, M)
    if L.shape[0] == 0:
        return np.zeros(delta.size), np.zeros((delta.size, P.shape[1]), dtype=complex)
    shift = np.max(L, axis=0)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    mags = np.exp(L - shift[None, :])  # (K, N)
    rot = np.exp(1j * TWO_PI * P)  # (K, M)
    S = neumaier_sum(mags[:, :, None] * rot[:, None, :], axis=0)  # (N, M)
    return shift, S


def evaluate_grid(series, delta, turns, deriv=False):
    """Values on the product grid radii x angles, shape (len(delta), len(turns))."""
    shift, S = _grid_parts(series, delta, turns, deriv)
    return S * np.exp(shift)[:, None]


def log_abs_grid(series, delta, turns, deriv=False):
    """log |s| on the product grid; safe when |s| over- or underflows."""
    shift, S = _grid_parts(series, delta, turns, deriv)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(S)) + shift[:, None]


def eval_series(series, z, deriv=False):
    """Evaluate at complex z with |z| < 1 (or the derivative when ``deriv``)."""
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    if np.any(rho >= 1):
        raise DomainError("|z| must be < 1")
    delta = 1.0 - rho
    turns = np.mod(np.angle(z) / TWO_PI, 1.0)
    out = evaluate(series, delta, turns, deriv)
    return complex(out) if out.ndim == 0 else out


def _is_square(q):
    s = math.isqrt(q)
    return s * s == q


def default_truncation(q, k_max, rel=1e-3):
    """Smallest J whose discarded tail is below ``rel`` times the retained sum.

    The sum is sum_j q^j r^{q^j} at the outermost certified radius
    r = 1 - q^{-(k_max + 1)}, and the tail is bounded by the geometric series
    with ratio q r^{q^{J+1} (q - 1)}.
    """
    x = float(log_radius(float(q) ** (-(k_max + 1))))
    retained = 0.0
    J = 0
    while True:
        J += 1
        retained += math.exp(J * math.log(q) + q**J * x)
        first = (J + 1) * math.log(q) + q ** (J + 1) * x
        log_ratio = math.log(q) + q ** (J + 1) * (q - 1) * x
        if log_ratio < 0 and J >= k_max + 1:
            tail = math.exp(first) / -math.expm1(log_ratio)
            if tail <= rel * retained:
                return J


def build_bloch_pair(decay, q=100, J=None, k_max=6, kind="bloch"):
    """f = sum a_j z^{q^j} and g = sum b_j z^{q^{j+1/2}}, j = 1..J."""
    q = int(q)
    if q < 4 or not _is_square(q):
        raise ArgumentError("q must be a perfect square >= 4 so that q^(j+1/2) is an integer")
    if J is None:
        J = default_truncation(q, k_max)
    if J < 2:
        raise ArgumentError("J must be >= 2")
    a = ru_coefficients(decay, q, J, 0.0)
    b = ru_coefficients(decay, q, J, 0.5)
    root = math.isqrt(q)
    f = SparseSeries.from_coefficients([q**j for j in range(1, J + 1)], a.values)
    g = SparseSeries.from_coefficients([root * q**j for j in range(1, J + 1)], b.values)
    prov = {"decay": decay, "q": q, "J": J, "a": a, "b": b}
    return FunctionPair(f, g, kind, prov)


def build_vmoa_pair(q=100, J=None, k_max=6):
    """The pair with a_j = b_j = 1/j (inverse-log decay)."""
    return build_bloch_pair(DecayFunction.inverse_log(), q, J, k_max, kind="vmoa")


def build_growth_pair(env, nu):
    """f from the odd segments (divided by z^{n_1}), g from the even ones."""
    K = env.K
    vals = tuple(getattr(nu, "values", nu))
    if len(vals) != K:
        raise ArgumentError("envelope and nu must have the same length K")
    if K < 3:
        raise ArgumentError("growth pair needs K >= 3 segments")
    n = env.n
    if any(b <= a for a, b in zip(n, n[1:])):
        raise ArgumentError("integer exponents n_k must be strictly increasing")
    log_c = [math.log(v) + s.log_a for v, s in zip(vals, env.segments)]
    odd = range(0, K, 2)
    even = range(1, K, 2)
    n1 = n[0]
    f = SparseSeries(tuple(n[i] - n1 for i in odd), tuple(log_c[i] for i in odd))
    g = SparseSeries(tuple(n[i] for i in even), tuple(log_c[i] for i in even))
    prov = {"env": env, "nu": nu, "shift": n1, "x_radius": float(env.x[2])}
    return FunctionPair(f, g, "growth", prov)
