"""Inductive coefficient sequences and the step function W-hat.

Both recurrences have the same shape,

    c_1 = 1,    c_j = max(W(r_j), (j - 1)/j * c_{j-1}),

with r_j = 1 - q^{-(j + offset)} for the lacunary (Bloch) construction and
r_j = t_j for the envelope construction.  The second argument of the max
keeps the sequence from dropping faster than 1/j.
"""

from dataclasses import dataclass
import math

import numpy as np

from growthbound._numeric import delta_from_x
from growthbound.errors import ArgumentError, DomainError, PreconditionError

__all__ = [
    "CoeffSeq",
    "NuSeq",
    "ru_coefficients",
    "nu_coefficients",
    "hat_w_eval",
    "hat_w_at_x",
    "sequence_violations",
]


@dataclass(frozen=True)
class CoeffSeq:
    values: tuple  # a_1..a_J
    q: int
    offset: float
    branches: tuple  # "W" or "ratio" for j >= 2 ("start" for j = 1)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, j):
        """1-based access: seq[j] == a_j."""
        if j < 1:
            raise IndexError("coefficients are indexed from 1")
        return self.values[j - 1]

    def delta(self, j):
        """1 - r_j = q^{-(j + offset)}."""
        return float(self.q) ** (-(j + self.offset))

    def to_csv(self):
        rows = ["j,a_j"] + [f"{j},{a:.17g}" for j, a in enumerate(self.values, 1)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class NuSeq:
    values: tuple  # nu_1..nu_K
    x_seq: tuple  # x_0..x_K with t_k = exp(x_k)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        if k < 1:
            raise IndexError("nu is indexed from 1")
        return self.values[k - 1]

    @property
    def t_seq(self):
        return np.exp(np.asarray(self.x_seq))

    def to_csv(self):
        rows = ["k,t_k,delta_k,x_k,nu_k"]
        for k, (x, nu) in enumerate(zip(self.x_seq[1:], self.values), 1):
            rows.append(f"{k},{math.exp(x):.17g},{-math.expm1(x):.17g},{x:.17g},{nu:.17g}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text, x0):
        xs, vals = [x0], []
        for line in text.strip().splitlines()[1:]:
            _k, _t, _d, x, nu = line.split(",")
            xs.append(float(x))
            vals.append(float(nu))
        return cls(tuple(vals), tuple(xs))


def _check_normalized(decay):
    if decay.at_delta(1.0) > 1.0:
        raise PreconditionError("decay function must be normalized (W(0) <= 1); use normalize_decay")


def _recurrence(w_values):
    vals, branches = [1.0], ["start"]
    for j in range(2, len(w_values) + 1):
        w = w_values[j - 1]
        carry = (j - 1) / j * vals[-1]
        if w >= carry:
            vals.append(w)
            branches.append("W")
        else:
            vals.append(carry)
            branches.append("ratio")
    return tuple(float(v) for v in vals), tuple(branches)


def ru_coefficients(decay, q=100, J=8, offset=0.0):
    """Coefficients a_1..a_J of the lacunary construction.

    ``offset = 0`` samples W at 1 - q^{-j} (the f-intervals), ``offset = 1/2``
    at 1 - q^{-(j+1/2)} (the g-intervals).
    """
    if q < 2 or int(q) != q:
        raise ArgumentError("q must be an integer >= 2")
    if J < 1:
        raise ArgumentError("J must be >= 1")
    if offset not in (0, 0.5):
        raise ArgumentError("offset must be 0 or 1/2")
    _check_normalized(decay)
    deltas = [float(q) ** (-(j + offset)) for j in range(1, J + 1)]
    w = [float(decay.at_delta(d)) for d in deltas]
    vals, branches = _recurrence(w)
    return CoeffSeq(vals, int(q), float(offset), branches)


def nu_coefficients(decay, t_seq=None, *, x_seq=None):
    """nu_1..nu_K from the breakpoints t_0 < t_1 < ... < t_K.

    Pass ``x_seq = log t`` instead of ``t_seq`` when the breakpoints are too
    close to 1 for double precision.
    """
    if x_seq is None:
        if t_seq is None:
            raise ArgumentError("give t_seq or x_seq")
        t = np.asarray(t_seq, dtype=float)
        if t.size and (np.any(t <= 0) or np.any(t >= 1)):
            raise ArgumentError("t_seq must lie in (0, 1)")
        x_seq = np.log(t)
    x = np.asarray(x_seq, dtype=float)
    if x.size < 2:
        raise ArgumentError("need t_0 and at least one breakpoint t_1")
    if np.any(np.diff(x) <= 0):
        raise ArgumentError("breakpoints must be strictly increasing")
    _check_normalized(decay)
    w = [float(decay.at_delta(d)) for d in delta_from_x(x[1:])]
    vals, _ = _recurrence(w)
    return NuSeq(vals, tuple(float(v) for v in x))


def hat_w_at_x(nu, x):
    """W-hat at log-radius x (vectorised).  1 below t_0, nu_k on [t_k, t_{k+1})."""
    x = np.asarray(x, dtype=float)
    xs = np.asarray(nu.x_seq)
    if np.any(x >= xs[-1]):
        raise DomainError("radius beyond t_K: envelope too short")
    steps = np.concatenate([[1.0, 1.0], np.asarray(nu.values[:-1])])  # below t_0, nu_0 := 1, nu_1.. nu_{K-1}
    idx = np.searchsorted(xs, x, side="right")
    out = steps[idx]
    return float(out) if out.ndim == 0 else out


def hat_w_eval(nu, r):
    """W-hat(r) for 0 <= r < t_K."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be >= 0")
    with np.errstate(divide="ignore"):
        return hat_w_at_x(nu, np.log(r))


def sequence_violations(seq, decay=None, rng=None, samples=1000):
    """List of violated invariants of a CoeffSeq or NuSeq (empty when clean)."""
    v = np.asarray(seq.values)
    bad = []
    if v[0] != 1.0:
        bad.append("first value is not 1")
    if np.any(np.diff(v) > 0):
        bad.append("sequence increases somewhere")
    idx = np.arange(1, v.size + 1)
    # the ratio branch reproduces 1/j up to accumulated rounding
    if np.any(v < (1.0 / idx) * (1.0 - 1e-12)):
        bad.append("lower bound c_j >= 1/j violated")
    if np.any(v <= 0) or np.any(v > 1):
        bad.append("values outside (0, 1]")
    # c_m <= (k/m) c_k for m < k, i.e. m c_m <= k c_k
    kc = idx * v
    diff = kc[None, :] - kc[:, None]
    upper = np.triu(np.ones(diff.shape, dtype=bool), 1)
    if np.any((diff < -1e-12 * np.broadcast_to(kc, diff.shape))[upper]):
        bad.append("ratio bound c_m <= (k/m) c_k violated")
    if decay is None:
        return bad
    if isinstance(seq, CoeffSeq):
        w = np.array([decay.at_delta(seq.delta(j)) for j in idx])
    else:
        w = np.asarray(decay.at_delta(delta_from_x(np.asarray(seq.x_seq[1:]))))
    for j in range(2, v.size + 1):
        carry = (j - 1) / j * v[j - 2]
        if v[j - 1] != w[j - 1] and v[j - 1] != carry:
            bad.append(f"value {j} matches neither max-argument")
        if v[j - 1] != max(w[j - 1], carry):
            bad.append(f"value {j} is not the max of its arguments")
    if isinstance(seq, CoeffSeq):
        # quantitative decay: c_J <= max(W(r_m), m/J) for every m <= J
        J = v.size
        bound = min(max(w[m - 1], m / J) for m in range(1, J + 1))
        if v[-1] > bound:
            bad.append("decay surrogate c_J <= min_m max(W(r_m), m/J) violated")
    else:
        rng = rng or np.random.default_rng(0)
        xs = np.asarray(seq.x_seq)
        lo, hi = math.log(-xs[0]) + 1.0, math.log(-xs[-1])
        x = -np.exp(rng.uniform(hi, lo, samples))
        x = x[x < xs[-1]]
        if np.any(hat_w_at_x(seq, x) < decay.at_x(x)):
            bad.append("W-hat does not dominate W")
    return bad
