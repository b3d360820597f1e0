"""Common-zero removal for the growth pair.

The zeros of a sparse series with few terms and huge exponents cannot be
listed one by one, but they can be confined.  On any circle where one term
beats the sum of all others (``D(x) = sum_i |c_i| r^{n_i} / |c_*| r^{n_*} < 1``)
Rouche's theorem gives the exact zero count inside, and the series has no
zeros on the circle itself.  Consecutive dominance ranges therefore cut the
disc into zero-free annuli and thin "suspect" annuli with known zero counts.

f and g can only share a zero inside one of f's suspect annuli.  When every
such annulus lies in a range where g is dominated by one term, g has no
zeros there and no rotation is needed.  Otherwise the zeros of f in the
overlapping annuli are located explicitly (argument principle on subdivided
squares, then Newton) and a rotation of g is chosen on an angle grid.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from growthbound._numeric import TWO_PI, delta_from_x, logsumexp
from growthbound.errors import ArgumentError, NumericalInstabilityError, PreconditionError

__all__ = ["Annulus", "DominanceMap", "ZeroReport", "dominance_map", "find_zeros", "remove_common_zeros"]

_MARGIN = 1e-9  # dominance requires D <= 1 - _MARGIN
_SPLIT = 0.5123  # off-centre split keeps zeros off square edges


@dataclass(frozen=True)
class Annulus:
    x_in: float  # log of the inner radius (-inf for the origin)
    x_out: float
    count: object  # number of zeros inside, None when not determined

    def contains(self, x):
        return self.x_in <= x <= self.x_out


@dataclass(frozen=True)
class DominanceMap:
    """Dominance ranges (j, x_a, x_b) and the suspect annuli between them."""

    ranges: tuple  # (term index, x_a, x_b) with term j dominant on [x_a, x_b]
    suspects: tuple  # Annulus tuple
    origin: int  # multiplicity of the zero at 0
    x_hi: float

    def dominated_at(self, x_in, x_out):
        """Index of a range covering [x_in, x_out] entirely, or None."""
        for j, a, b in self.ranges:
            if a <= x_in and x_out <= b:
                return j
        return None


def _hull(slopes, intercepts):
    """Indices of the upper envelope of lines (slopes increasing) and breakpoints."""
    stack = []
    for j in range(len(slopes)):
        while stack:
            if len(stack) == 1:
                break
            i, h = stack[-1], stack[-2]
            x_hj = (intercepts[h] - intercepts[j]) / (slopes[j] - slopes[h])
            x_hi = (intercepts[h] - intercepts[i]) / (slopes[i] - slopes[h])
            if x_hj <= x_hi:
                stack.pop()
            else:
                break
        stack.append(j)
    breaks = [
        (intercepts[a] - intercepts[b]) / (slopes[b] - slopes[a]) for a, b in zip(stack, stack[1:])
    ]
    return stack, breaks


def _bisect_y(fun, x_lo, x_hi, iters=200):
    """Sign change of ``fun`` between x_lo < x_hi < 0, bisecting in log(-x).

    Requires fun(x_lo) and fun(x_hi) of opposite signs; returns the endpoint
    pair after bisection (left, right).
    """
    y_lo, y_hi = math.log(-x_lo), math.log(-x_hi)  # y_lo > y_hi
    s_lo = fun(x_lo) > 0
    for _ in range(iters):
        y_mid = 0.5 * (y_lo + y_hi)
        if y_mid in (y_lo, y_hi):
            break
        x_mid = -math.exp(y_mid)
        if (fun(x_mid) > 0) == s_lo:
            y_lo = y_mid
        else:
            y_hi = y_mid
    return -math.exp(y_lo), -math.exp(y_hi)


def dominance_map(series, x_hi):
    """Dominance ranges and suspect annuli of ``series`` inside |z| <= e^{x_hi}."""
    if not x_hi < 0:
        raise ArgumentError("radius must be < 1")
    ns = list(series.exponents)
    lcs = np.asarray(series.log_coeffs, dtype=float)
    if not ns:
        raise ArgumentError("empty series")
    slopes = [float(n) for n in ns]
    stack, breaks = _hull(slopes, list(lcs))
    target = math.log1p(-_MARGIN)

    def log_d(j, x):
        rel = np.array([lcs[i] - lcs[j] + float(ns[i] - ns[j]) * x for i in range(len(ns)) if i != j])
        return float(logsumexp(rel)) if rel.size else -math.inf

    def dlog_d(j, x):
        idx = [i for i in range(len(ns)) if i != j]
        if not idx:
            return 0.0
        rel = np.array([lcs[i] - lcs[j] + float(ns[i] - ns[j]) * x for i in idx])
        w = np.exp(rel - rel.max())
        w /= w.sum()
        return float(np.sum(w * np.array([float(ns[i] - ns[j]) for i in idx])))

    ranges = []
    for pos, j in enumerate(stack):
        left = -math.inf if pos == 0 else breaks[pos - 1]
        if left >= x_hi:
            break
        right = x_hi if pos == len(stack) - 1 else min(breaks[pos], x_hi)
        # minimiser of the convex function log D on [left, right]
        if pos == 0:
            x_min = -math.inf if dlog_d(j, right) > 0 else right
        elif dlog_d(j, left) >= 0:
            x_min = left
        elif dlog_d(j, right) <= 0:
            x_min = right
        else:
            x_min = _bisect_y(lambda x: dlog_d(j, x), left, right)[0]
        if x_min == -math.inf:
            a = -math.inf
        else:
            if log_d(j, x_min) > target:
                continue
            if left == -math.inf or log_d(j, left) <= target:
                a = left
            else:
                a = _bisect_y(lambda x: log_d(j, x) - target, left, x_min)[1]
        if log_d(j, right) <= target:
            b = right
        else:
            start = x_min
            if start == -math.inf:
                start = min(right, -1.0)
                while log_d(j, start) > target:
                    start *= 2.0
            b = _bisect_y(lambda x: log_d(j, x) - target, start, right)[0]
        ranges.append((j, a, b))

    suspects = []
    for (j0, _, b0), (j1, a1, _) in zip(ranges, ranges[1:]):
        suspects.append(Annulus(b0, a1, ns[j1] - ns[j0]))
    if ranges and ranges[-1][2] < x_hi:
        suspects.append(Annulus(ranges[-1][2], x_hi, None))
    if not ranges:
        suspects.append(Annulus(-math.inf, x_hi, None))
    origin = ns[0] if ranges and ranges[0][1] == -math.inf and ranges[0][0] == 0 else 0
    return DominanceMap(tuple(ranges), tuple(suspects), int(origin), float(x_hi))


def _log_lower_bound(series, j, x):
    """log of |c_j| r^{n_j} (1 - D(x)): a lower bound for |series| at radius e^x."""
    ns = series.exponents
    lcs = series.log_coeffs
    rel = np.array([lcs[i] - lcs[j] + float(ns[i] - ns[j]) * x for i in range(len(ns)) if i != j])
    d = math.exp(float(logsumexp(rel))) if rel.size else 0.0
    if d >= 1.0:
        return -math.inf
    lead = lcs[j] + (0.0 if ns[j] == 0 else float(ns[j]) * x)
    return lead + math.log1p(-d) + math.log(series.scale)


# -- explicit zeros ----------------------------------------------------------


def _scaled_values(series, z, deriv=False):
    """series(z) / e^{M(z)} with a positive per-point scale (phase is exact)."""
    z = np.asarray(z, dtype=complex)
    logz = np.log(z)
    rows = []
    for n, lc in zip(series.exponents, series.log_coeffs):
        if deriv:
            if n == 0:
                continue
            rows.append(lc + math.log(n) + (n - 1) * logz)
        else:
            rows.append(lc + n * logz if n else np.full(z.shape, lc, dtype=complex))
    e = np.array(rows)
    m = np.max(e.real, axis=0)
    return np.sum(np.exp(e - m), axis=0), m


def _newton(series, z, tol, iters=100):
    for _ in range(iters):
        f, mf = _scaled_values(series, z)
        d, md = _scaled_values(series, z, deriv=True)
        step = f / d * np.exp(mf - md)
        z = z - step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z, True
    return z, False


def _winding(series, corners, samples, max_samples=1 << 16):
    """Winding number of series around the square boundary (trapezoid phase tracking)."""
    while True:
        pts = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            t = np.arange(samples) / samples
            pts.append(a + (b - a) * t)
        pts = np.concatenate(pts)
        vals, _ = _scaled_values(series, pts)
        if np.any(vals == 0):
            raise NumericalInstabilityError("zero on a square boundary")
        steps = np.angle(np.roll(vals, -1) / vals)
        total = steps.sum() / TWO_PI
        if np.max(np.abs(steps)) < math.pi / 3 and abs(total - round(total)) < 0.1:
            return int(round(total))
        if samples * 2 > max_samples:
            raise NumericalInstabilityError("winding number did not settle")
        samples *= 2


def find_zeros(series, x_in, x_out, refine_tol=1e-12, samples=256, max_degree=1 << 14):
    """Zeros of a sparse polynomial with e^{x_in} <= |z| <= e^{x_out}.

    Returns a sorted list of (z, multiplicity).  Raises
    NumericalInstabilityError when the counts of a rectangle and its four
    children disagree.
    """
    if series.exponents[-1] > max_degree:
        raise NumericalInstabilityError(
            f"degree {series.exponents[-1]} too large for explicit zero isolation (limit {max_degree})"
        )
    rho_in = 0.0 if x_in == -math.inf else math.exp(x_in)
    rho_out = math.exp(x_out)
    w0 = 1.05 * rho_out
    c0 = rho_out * complex(0.0123, 0.0171)
    min_side = max(refine_tol, 1e-9) * rho_out
    found = []

    def count(x0, x1, y0, y1):
        return _winding(series, [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)], samples)

    def meets_annulus(x0, x1, y0, y1):
        nearest = math.hypot(min(max(0.0, x0), x1), min(max(0.0, y0), y1))
        farthest = max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1))
        return nearest <= rho_out and farthest >= rho_in

    box = (c0.real - w0, c0.real + w0, c0.imag - w0, c0.imag + w0)
    stack = [box + (count(*box),)]
    while stack:
        x0, x1, y0, y1, n = stack.pop()
        if n == 0 or not meets_annulus(x0, x1, y0, y1):
            continue
        side = max(x1 - x0, y1 - y0)
        if n == 1 or side < min_side:
            c = complex((x0 + x1) / 2, (y0 + y1) / 2)
            z, ok = _newton(series, c, refine_tol)
            inside = x0 <= z.real <= x1 and y0 <= z.imag <= y1
            if (ok and inside) or side < min_side:
                if rho_in * (1 - 1e-12) <= abs(z) <= rho_out * (1 + 1e-12):
                    found.append((complex(z), n))
                continue
        xm = x0 + _SPLIT * (x1 - x0)
        ym = y0 + _SPLIT * (y1 - y0)
        kids = [(a, b, c, d) for a, b in ((x0, xm), (xm, x1)) for c, d in ((y0, ym), (ym, y1))]
        counts = [count(*k) for k in kids]
        if sum(counts) != n:
            raise NumericalInstabilityError("zero count mismatch between subdivision levels")
        stack += [k + (m,) for k, m in zip(kids, counts)]
    return sorted(found, key=lambda p: (abs(p[0]), np.angle(p[0])))


@dataclass
class ZeroReport:
    radius_x: float
    f_map: DominanceMap
    g_map: DominanceMap
    method: str  # "dominance" or "explicit"
    zeros: tuple = ()  # explicit zeros (z, multiplicity)
    zero_counts: tuple = ()  # (x_in, x_out, count) of f's suspect annuli inside the disc
    theta_turns: float = 0.0
    log_achieved_min: float = math.inf
    notes: tuple = field(default_factory=tuple)

    @property
    def theta(self):
        return TWO_PI * self.theta_turns

    @property
    def achieved_min(self):
        return math.exp(self.log_achieved_min) if self.log_achieved_min < math.inf else math.inf

    def to_text(self):
        lines = [
            f"radius_delta = {float(delta_from_x(self.radius_x)):.17g}",
            f"method = {self.method}",
            f"theta_turns = {self.theta_turns:.17g}",
            f"log_achieved_min = {self.log_achieved_min:.17g}",
            f"f_origin_multiplicity = {self.f_map.origin}",
            f"g_origin_multiplicity = {self.g_map.origin}",
        ]
        for a in self.zero_counts:
            cnt = "unknown" if a[2] is None else str(a[2])
            lines.append(f"f_zero_annulus x_in={a[0]:.17g} x_out={a[1]:.17g} count={cnt}")
        for z, m in self.zeros:
            lines.append(f"zero re={z.real:.17g} im={z.imag:.17g} multiplicity={m}")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def remove_common_zeros(pair, radius=None, angle_grid=1024, refine_tol=1e-12, *, x_radius=None):
    """Rotate g so that f and g have no common zero in |z| <= radius.

    ``radius`` defaults to t_2 of the growth construction (give ``x_radius =
    log radius`` for radii too close to 1 for a float).  Returns the new pair
    (with ``zero_report`` set) and the report.
    """
    if pair.kind != "growth":
        raise ArgumentError("remove_common_zeros applies to growth pairs")
    if x_radius is None:
        x_radius = math.log(radius) if radius is not None else pair.provenance["x_radius"]
    if angle_grid < 1:
        raise ArgumentError("angle_grid must be >= 1")
    f, g = pair.f, pair.g
    fmap, gmap = dominance_map(f, x_radius), dominance_map(g, x_radius)
    if fmap.origin and gmap.origin:
        raise PreconditionError("f and g both vanish at the origin; divide f by z^{n_1} first")

    counts, overlaps = [], []
    log_min = math.inf
    for ann in fmap.suspects:
        counts.append((ann.x_in, ann.x_out, ann.count))
        if ann.count == 0:
            continue
        j = gmap.dominated_at(ann.x_in, ann.x_out)
        if j is None or (ann.x_in == -math.inf and gmap.origin):
            overlaps.append(ann)
            continue
        lo = ann.x_in if ann.x_in > -math.inf else min(ann.x_out, -1.0) * 64
        xs = -np.geomspace(-lo, -ann.x_out, 65) if lo < 0 and ann.x_out < 0 else [ann.x_out]
        log_min = min(log_min, min(_log_lower_bound(g, j, float(x)) for x in xs))
    if fmap.origin and not gmap.origin:
        log_min = min(log_min, _log_lower_bound(g, 0, -math.inf) if g.exponents[0] == 0 else log_min)

    if not overlaps:
        report = ZeroReport(x_radius, fmap, gmap, "dominance", (), tuple(counts), 0.0, log_min)
        if not log_min > -math.inf:
            raise NumericalInstabilityError("dominance lower bound for g underflowed")
        return replace(pair, g=g.rotated(0.0), zero_report=report), report

    zeros = []
    for ann in overlaps:
        zeros += find_zeros(f, ann.x_in, ann.x_out, refine_tol)
    if not zeros:
        report = ZeroReport(x_radius, fmap, gmap, "explicit", (), tuple(counts), 0.0, log_min)
        return replace(pair, g=g.rotated(0.0), zero_report=report), report
    zs = np.array([z for z, _ in zeros])
    # g(e^{i theta} z_j) = sum_m c_m z_j^{n_m} e^{2 pi i n_m theta}
    ns = np.array(g.exponents, dtype=float)
    a = np.exp(np.array(g.log_coeffs)[:, None] + ns[:, None] * np.log(zs)[None, :])  # (m, j)
    thetas = np.arange(angle_grid) / angle_grid
    rot = np.exp(1j * TWO_PI * np.outer(thetas, ns))  # (theta, m)
    vals = np.abs(rot @ a) * g.scale  # (theta, j)
    mins = vals.min(axis=1)
    best = int(np.argmax(mins))  # first maximiser = smallest angle
    if not mins[best] > 0:
        raise NumericalInstabilityError("internal error: every rotation leaves a common zero")
    log_min = min(log_min, math.log(mins[best]))
    report = ZeroReport(
        x_radius, fmap, gmap, "explicit", tuple(zeros), tuple(counts), float(thetas[best]), log_min
    )
    return replace(pair, g=g.rotated(float(thetas[best])), zero_report=report), report
