"""Supporting-line envelopes of u(x) = -log omega(e^x).

Segment k is the tangent line

    l_k(x) = log a_k + beta_k * x

of the convex function u at a point tau_k.  Given the left endpoint
x_{k-1}, tau_k is placed so that the gap u - l_k equals h at x_{k-1}; the
right endpoint x_k is where the gap climbs back to 2h.  The next line then
starts with gap h at x_k, so l_{k+1}(x_k) - l_k(x_k) = h exactly and, since
the slopes increase, l_{k+1} - l_k >= h on [x_k, 0).

Consequences checked by :func:`verify_envelope`:

* a_k r^beta_k <= 1/omega(r) everywhere (supporting line),
* e^{-2h}/omega(r) <= a_k r^beta_k on [t_{k-1}, t_k],
* the off-diagonal sums of a_m r^beta_m are at most half the diagonal term,
  and the same with the integer exponents n_k = floor(beta_k) + 1.

All radii are carried as x = log r; near the unit circle ``t_k`` rounds to 1.0
in double precision while ``x_k`` and ``delta_k = -expm1(x_k)`` do not.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from growthbound._numeric import delta_from_x, log_radius, logsumexp
from growthbound.errors import ArgumentError, ConstructionError, PreconditionError
from growthbound.weights import check_log_convex

__all__ = ["Segment", "Envelope", "EnvelopeReport", "build_envelope", "verify_envelope"]

LOG_NINE_TENTHS = math.log(0.9)
_MAXITER = 200


@dataclass(frozen=True)
class Segment:
    k: int
    x: float  # right endpoint x_k
    tau: float  # tangency point
    beta: float
    log_a: float
    n: int  # floor(beta) + 1


@dataclass(frozen=True)
class Envelope:
    h: float
    x0: float
    segments: tuple
    x_end: float  # log r_max
    k_cover: int  # first k with x_k >= x_end
    truncated: bool = False
    warnings: tuple = ()

    @property
    def K(self):
        return len(self.segments)

    @property
    def x(self):
        """x_0, x_1, ..., x_K."""
        return np.array([self.x0] + [s.x for s in self.segments])

    @property
    def delta(self):
        return delta_from_x(self.x)

    @property
    def t(self):
        return np.exp(self.x)

    @property
    def beta(self):
        return np.array([s.beta for s in self.segments])

    @property
    def log_a(self):
        return np.array([s.log_a for s in self.segments])

    @property
    def n(self):
        return [s.n for s in self.segments]

    @property
    def n_gap(self):
        """n_k - beta_k in (0, 1], exact even where float(n_k) would round."""
        b = self.beta
        return 1.0 - (b - np.floor(b))

    def lines(self, x, integer=False):
        """Matrix of l_m(x) (or log a_m + n_m x), shape (K, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.log_a[:, None] + self.beta[:, None] * x[None, :]
        if integer:
            out = out + self.n_gap[:, None] * x[None, :]
        return out

    def to_text(self):
        """Plain-text table, one row per segment (full round-trip precision)."""
        head = [
            "# envelope",
            f"# h = {self.h!r}",
            f"# x0 = {self.x0!r}",
            f"# x_end = {self.x_end!r}",
            f"# k_cover = {self.k_cover}",
            f"# truncated = {int(self.truncated)}",
            "# k x_k t_k delta_k beta_k log_a_k n_k tau_k",
        ]
        rows = [
            f"{s.k} {s.x:.17g} {math.exp(s.x):.17g} {-math.expm1(s.x):.17g} "
            f"{s.beta:.17g} {s.log_a:.17g} {s.n} {s.tau:.17g}"
            for s in self.segments
        ]
        return "\n".join(head + rows) + "\n"

    @classmethod
    def from_text(cls, text):
        meta, segs = {}, []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, val = line[1:].split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            k, x, _t, _d, beta, log_a, n, tau = line.split()
            segs.append(Segment(int(k), float(x), float(tau), float(beta), float(log_a), int(n)))
        return cls(
            h=float(meta["h"]),
            x0=float(meta["x0"]),
            segments=tuple(segs),
            x_end=float(meta["x_end"]),
            k_cover=int(meta["k_cover"]),
            truncated=bool(int(meta.get("truncated", "0"))),
        )


def _bisect_below(fun, y_start, target, y_floor):
    """Largest-x point with fun <= target, for fun increasing as y decreases.

    ``y`` is log(-x), so moving y down moves x toward 0 and fun(y_start) is
    assumed <= target.  The bracket is grown geometrically and then bisected
    down to adjacent floats (at most 200 halvings); the returned y keeps
    fun(y) <= target.  Returns None when the target is never exceeded above
    ``y_floor``.
    """
    step = 1.0
    y_above = y_start
    while True:
        y_try = max(y_start - step, y_floor)
        if fun(y_try) > target:
            y_below = y_try
            break
        if y_try == y_floor:
            return None
        y_above = y_try
        step *= 2.0
    for _ in range(_MAXITER):
        mid = 0.5 * (y_above + y_below)
        if mid == y_above or mid == y_below:
            break
        if fun(mid) > target:
            y_below = mid
        else:
            y_above = mid
    return y_above


def _next_segment(weight, k, x_left, line_left, h, y_floor):
    """Segment k starting at x_left, where the previous line has value line_left.

    For k = 1 ``line_left`` is u(x0) - 2h, so every segment starts with the
    handoff l_k(x_{k-1}) = line_left + h.
    """
    u = lambda x: float(weight.u(x))
    du = lambda x: float(weight.du(x))
    u_left = u(x_left)
    start_value = line_left + h
    target = u_left - start_value  # gap of the new line at x_left, <= h
    y_left = math.log(-x_left)

    def gap_at_left(y):
        tau = -math.exp(y)
        return u_left - u(tau) + du(tau) * (tau - x_left)

    y_tau = _bisect_below(gap_at_left, y_left, target, y_floor)
    if y_tau is None:
        return None, "weight range exhausted before the next tangency point"
    tau = -math.exp(y_tau)
    beta = du(tau)
    # tangent at tau shifted down by target - gap_at_left(tau) >= 0
    log_a = start_value - beta * x_left

    def gap(y):
        x = -math.exp(y)
        return u(x) - log_a - beta * x

    y_right = _bisect_below(gap, y_tau, 2.0 * h, y_floor)
    note = None
    if y_right is None:
        y_right = y_floor
        note = "weight range exhausted inside a segment"
    x_right = -math.exp(y_right)
    return Segment(k, x_right, tau, beta, log_a, int(math.floor(beta)) + 1), note


def build_envelope(weight, h=8.0, x0=-0.1, r_max=None, K_max=64, *, delta_max=None, guard=2, convexity_tol=1e-9):
    """Build the supporting-line envelope of ``weight`` on [e^x0, r_max].

    ``r_max`` may instead be given as ``delta_max = 1 - r_max``, which is the
    only way to reach radii closer to 1 than double precision allows.  After
    the first segment whose right end reaches r_max (index ``k_cover``),
    ``guard`` further segments are appended so that every covered annulus has
    its two right neighbours explicitly available.  ``K_max`` caps the number
    of covering segments; hitting it sets ``truncated`` and records a warning.
    """
    if not h >= 8:
        raise ArgumentError("separation parameter must satisfy h >= 8")
    if not LOG_NINE_TENTHS < x0 < 0:
        raise ArgumentError("x0 must lie in (log(9/10), 0) so that t_0 > 9/10")
    if (r_max is None) == (delta_max is None):
        raise ArgumentError("give exactly one of r_max and delta_max")
    if delta_max is None:
        if not 0.9 < r_max < 1:
            raise ArgumentError("r_max must lie in (9/10, 1)")
        x_end = math.log(r_max)
    else:
        if not 0 < delta_max < 0.1:
            raise ArgumentError("delta_max must lie in (0, 1/10)")
        x_end = float(log_radius(delta_max))
    if x_end <= x0:
        raise ArgumentError("r_max must exceed t_0 = exp(x0)")
    x_top = weight.x_max()
    if weight.family == "table" and x0 < weight.params["x"][0]:
        raise PreconditionError("x0 lies outside the sampled range of the table weight")

    hi_x = min(x_end, x_top) if x_top < 0 else x_end
    grid = -np.geomspace(-x0, -hi_x, 400)
    report = check_log_convex(weight, grid, tol=convexity_tol)
    if not report.passed:
        raise PreconditionError(
            f"1/omega is not log-convex on [x0, log r_max]: second difference "
            f"{report.min_second_difference:.3g} at triple {report.violation}"
        )

    # smallest admissible log(-x): 0 side of the domain
    y_floor = math.log(-x_top) if x_top < 0 else math.log(np.finfo(float).tiny) + 5.0

    segments = []
    warnings = []
    truncated = False
    k_cover = None
    x_left = x0
    line_left = float(weight.u(x0)) - 2.0 * h
    while True:
        k = len(segments) + 1
        if k_cover is None and k > K_max:
            truncated = True
            warnings.append(f"K_max={K_max} reached before r_max was covered")
            break
        if k_cover is not None and k > k_cover + guard:
            break
        seg, note = _next_segment(weight, k, x_left, line_left, h, y_floor)
        if seg is None:
            if k_cover is None:
                truncated = True
                warnings.append(note)
            else:
                warnings.append(f"guard segment {k}: {note}")
            break
        if segments:
            prev = segments[-1]
            if not seg.beta > prev.beta:
                raise ConstructionError(f"slope did not increase at segment {k}")
            if not seg.n > prev.n:
                raise ConstructionError(
                    f"integer exponents n_k stopped increasing at segment {k}: "
                    "increase h or move x0 toward 0"
                )
        segments.append(seg)
        if note is not None:
            truncated = k_cover is None
            warnings.append(f"segment {k}: {note}")
            if k_cover is None:
                break
        if k_cover is None and seg.x >= x_end:
            k_cover = k
        x_left = seg.x
        line_left = seg.log_a + seg.beta * seg.x
    if not segments:
        raise ConstructionError("no envelope segment could be built")
    if k_cover is None:
        k_cover = len(segments)
    return Envelope(
        h=float(h),
        x0=float(x0),
        segments=tuple(segments),
        x_end=x_end,
        k_cover=k_cover,
        truncated=truncated,
        warnings=tuple(warnings),
    )


@dataclass
class PropertyRecord:
    name: str
    value: float  # worst value over the grid
    threshold: float
    sense: str  # "<=" or ">="
    passed: bool
    where: tuple = ()  # (k, x) of the worst point

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        loc = f" at k={self.where[0]}, x={self.where[1]:.6g}" if self.where else ""
        return f"{flag} {self.name}: {self.value:.6g} {self.sense} {self.threshold:.6g}{loc}"


@dataclass
class EnvelopeReport:
    records: dict = field(default_factory=dict)
    n_points: int = 0
    skipped: int = 0
    K: int = 0

    @property
    def passed(self):
        return all(r.passed for r in self.records.values())

    def __getitem__(self, name):
        return self.records[name]

    def to_text(self):
        lines = [f"# envelope verification: {self.n_points} grid points, {self.skipped} skipped, K={self.K}"]
        lines += [r.line() for r in self.records.values()]
        return "\n".join(lines) + "\n"


def default_grid(env, per_interval=None, n_points=2000):
    """Grid in x covering [x_0, x_end], geometric in -x on each [x_{k-1}, x_k]."""
    xs = env.x[: env.k_cover + 1].copy()
    xs[-1] = max(min(xs[-1], env.x_end), xs[-2])
    count = len(xs) - 1
    per = per_interval or max(3, int(math.ceil(n_points / count)))
    pieces = [-np.geomspace(-xs[i], -xs[i + 1], per) for i in range(count) if xs[i + 1] > xs[i]]
    return np.unique(np.concatenate(pieces))


def _record(records, name, values, ks, xs, threshold, sense, atol=0.0):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return
    atol = np.broadcast_to(np.asarray(atol, dtype=float), values.shape)
    if sense == "<=":
        excess = values - threshold - atol
    else:
        excess = threshold - atol - values
    i = int(np.argmax(excess))
    ok = bool(excess[i] <= 0)
    records[name] = PropertyRecord(name, float(values[i]), threshold, sense, ok, (int(ks[i]), float(xs[i])))


def _tail_log(h, K, k):
    """log of sum_{m >= max(K+1, k+2)} e^{-h(m-k-1)}."""
    m0 = np.maximum(K + 1, k + 2)
    return -h * (m0 - k - 1) - math.log1p(-math.exp(-h))


def verify_envelope(env, weight, nu=None, x_grid=None, *, r_grid=None, n_points=2000):
    """Check the envelope properties on a grid of radii.

    ``nu`` is a sequence nu_1..nu_K (or an object with ``values``); ``None``
    means the constant-one sequence.  Grid points are given in log-radius
    ``x_grid`` (or as ``r_grid``); points outside [x_0, max(x_end, x_k_cover)]
    are skipped and counted.  Every point is tested against each segment k
    whose closed interval [x_{k-1}, x_k] contains it.
    """
    if r_grid is not None:
        x_grid = np.log(np.asarray(r_grid, dtype=float))
    if x_grid is None:
        x_grid = default_grid(env, n_points=n_points)
    x_grid = np.asarray(x_grid, dtype=float)
    K, h = env.K, env.h
    bounds = env.x
    top = bounds[env.k_cover]
    inside = (x_grid >= bounds[0]) & (x_grid <= top)
    skipped = int(np.count_nonzero(~inside))
    x_in = x_grid[inside]

    # (point, k) pairs with x in [x_{k-1}, x_k]
    pts, ks = [], []
    for i, x in enumerate(x_in):
        for k in range(1, K + 1):
            if bounds[k - 1] <= x <= bounds[k]:
                pts.append(i)
                ks.append(k)
    pts = np.array(pts, dtype=int)
    ks = np.array(ks, dtype=int)
    xs = x_in[pts]

    if nu is None:
        log_nu = np.zeros(K)
    else:
        vals = np.asarray(getattr(nu, "values", nu), dtype=float)[:K]
        if vals.size < K:
            raise ArgumentError("nu sequence shorter than the envelope")
        log_nu = np.log(vals)

    u = weight.u(x_in)
    L = env.lines(x_in)  # (K, N)
    Ln = env.lines(x_in, integer=True)
    records = {}

    # (I) and (A): every line stays below u
    _record(records, "I", np.max(L - u[None, :], axis=0), np.argmax(L - u[None, :], axis=0) + 1, x_in, 1e-12, "<=")
    _record(records, "A", np.max(Ln - u[None, :], axis=0), np.argmax(Ln - u[None, :], axis=0) + 1, x_in, 1e-12, "<=")

    idx = ks - 1
    Lk = L[idx, pts]
    Lnk = Ln[idx, pts]
    uk = u[pts]
    # (II') and (B) sandwich on the own interval
    # rounding in log-domain differences grows with |u|
    slack = 1e-9 + 16.0 * np.finfo(float).eps * np.abs(uk)
    _record(records, "II'", uk - Lk, ks, xs, 2.0 * h, "<=", slack)
    _record(records, "B", Lnk - uk, ks, xs, LOG_NINE_TENTHS - 2.0 * h, ">=", slack)

    m = np.arange(1, K + 1)[:, None]
    far = np.abs(m - ks[None, :]) >= 2  # (K, P)
    diff = L[:, pts] - Lk[None, :]
    diffn = Ln[:, pts] - Lnk[None, :]
    neg_inf = np.full_like(diff, -np.inf)
    tail = _tail_log(h, K, ks)

    log_iii_fin = logsumexp(np.where(far, diff, neg_inf), axis=0)
    log_iii = np.logaddexp(log_iii_fin, tail)
    _record(records, "III_finite", np.exp(log_iii_fin), ks, xs, 0.5, "<=")
    _record(records, "III", np.exp(log_iii), ks, xs, 0.5, "<=")

    nu_diff = log_nu[:, None] - log_nu[idx][None, :]
    log_iv = np.logaddexp(logsumexp(np.where(far, diff + nu_diff, neg_inf), axis=0), tail)
    _record(records, "IV", np.exp(log_iv), ks, xs, 0.5, "<=")

    # (C): integer exponents; the tail is carried over via r^n <= r^beta and
    # r^beta_k = r^n_k * exp((beta_k - n_k) x)
    beta_gap = -env.n_gap[idx] * xs
    log_c = np.logaddexp(logsumexp(np.where(far, diffn + nu_diff, neg_inf), axis=0), tail + beta_gap)
    _record(records, "C", np.exp(log_c), ks, xs, 0.5 * 10.0 / 9.0, "<=")

    # decay law a_m r^beta_m <= a_k r^beta_k e^{-h(m-k-1)} for m >= k+2
    ahead = m >= ks[None, :] + 2
    law = np.where(ahead, diff + h * (m - ks[None, :] - 1), -np.inf)
    if np.any(ahead):
        _record(records, "tail_law", np.max(law, axis=0), ks, xs, 0.0, "<=", 1e-9)

    # r^beta_k / r^n_k in (1, 10/9] for r >= 9/10
    ratio = np.exp(-env.n_gap[:, None] * x_in[None, :])
    sel = x_in >= LOG_NINE_TENTHS
    if np.any(sel):
        worst = np.max(ratio[:, sel], axis=0)
        _record(records, "exponent_ratio_max", worst, np.argmax(ratio[:, sel], axis=0) + 1, x_in[sel], 10.0 / 9.0, "<=")
        least = np.min(ratio[:, sel], axis=0)
        _record(records, "exponent_ratio_min", least, np.argmin(ratio[:, sel], axis=0) + 1, x_in[sel], 1.0, ">=")

    n = env.n
    mono = all(b > a for a, b in zip(n, n[1:]))
    records["n_increasing"] = PropertyRecord("n_increasing", float(mono), 1.0, ">=", mono)
    return EnvelopeReport(records=records, n_points=int(x_grid.size), skipped=skipped, K=K)
