"""Grid certification of the lower and upper bounds for the constructed pairs.

Every required record is an angle-free bound: the dominant term minus the
sum of all other terms, with the discarded tail of the infinite series added
on the upper-bound side.  Angular minima over the grid are reported as
informational records next to them.  All reductions pick the worst grid
point with the tie-break (smallest k, smallest delta, smallest angle), so
verdicts and locations do not depend on traversal order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from growthbound._numeric import delta_from_x, golden_turns, log_radius, logsumexp
from growthbound.coefficients import hat_w_at_x
from growthbound.envelope import _tail_log, verify_envelope
from growthbound.errors import ArgumentError, PreconditionError
from growthbound.series import log_abs_grid

__all__ = [
    "CertGrid",
    "CertRecord",
    "CertReport",
    "Profile",
    "certify_bloch",
    "certify_growth",
    "little_o_profile",
    "constants_check",
]

SLACK = 1e-9


@dataclass(frozen=True)
class CertGrid:
    """Sampling of the interval system.

    ``k_range`` is inclusive; ``None`` means the natural range (1..6 for the
    Bloch pairs, every covering annulus beyond t_2 for growth pairs).
    """

    k_range: tuple = None
    radial: int = 40
    angles: int = 64
    angle_offset: float = 0.0  # jitter of the golden-ratio angles, in turns

    def __post_init__(self):
        if self.radial < 2 or self.angles < 1:
            raise ArgumentError("grid needs >= 2 radial and >= 1 angular samples")


@dataclass(frozen=True)
class CertRecord:
    name: str
    k: int
    value: float
    threshold: float
    sense: str  # ">=" or "<="
    passed: bool
    where: tuple = ()  # (k, delta, turns)
    required: bool = True

    def line(self):
        flag = ("PASS" if self.passed else "FAIL") if self.required else "INFO"
        loc = ""
        if self.where:
            k, d, t = self.where
            loc = f" at k={k}, delta={d:.6g}" + ("" if t is None else f", turns={t:.6g}")
        return f"{flag} {self.name} k={self.k}: {self.value:.10g} {self.sense} {self.threshold:.10g}{loc}"


@dataclass
class CertReport:
    kind: str
    records: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    scale: float = math.nan  # multiply both functions by this to get constant 1
    profile: list = field(default_factory=list)  # (delta, target, |f|, |g|, ratio)

    @property
    def passed(self):
        return all(r.passed for r in self.records if r.required)

    def select(self, name):
        return [r for r in self.records if r.name == name]

    def worst(self, name):
        """Worst record of a given name over all k (deterministic tie-break)."""
        recs = self.select(name)
        if not recs:
            raise KeyError(name)
        sign = 1.0 if recs[0].sense == ">=" else -1.0
        return min(recs, key=lambda r: (sign * r.value, r.k))

    def to_text(self):
        lines = [f"# certification report: kind={self.kind}"]
        lines += [f"# {k} = {_fmt(v)}" for k, v in self.constants.items()]
        lines.append(f"# scale = {_fmt(self.scale)}")
        lines += [r.line() for r in self.records]
        lines.append(f"OVERALL {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_kv(self):
        out = [f"kind={self.kind}", f"passed={int(self.passed)}", f"scale={_fmt(self.scale)}"]
        out += [f"constant.{k}={_fmt(v)}" for k, v in self.constants.items()]
        for r in self.records:
            key = f"{r.name}.k{r.k}"
            out.append(f"{key}.value={_fmt(r.value)}")
            out.append(f"{key}.threshold={_fmt(r.threshold)}")
            out.append(f"{key}.passed={int(r.passed)}")
            out.append(f"{key}.required={int(r.required)}")
            if r.where:
                out.append(f"{key}.delta={_fmt(r.where[1])}")
                if r.where[2] is not None:
                    out.append(f"{key}.turns={_fmt(r.where[2])}")
        return "\n".join(out) + "\n"

    def profile_csv(self):
        rows = ["delta,target,abs_f,abs_g,ratio,log_target,log_abs_f,log_abs_g"]
        rows += [",".join(_fmt(v) for v in row) for row in self.profile]
        return "\n".join(rows) + "\n"


def _profile_row(delta, log_target, log_f, log_g, log_ratio):
    """(delta, target, |f|, |g|, ratio) plus the logs, which survive overflow."""
    with np.errstate(over="ignore"):
        vals = np.exp([log_target, log_f, log_g, log_ratio])
    return (float(delta), *map(float, vals), float(log_target), float(log_f), float(log_g))


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _threads():
    try:
        return max(1, int(os.environ.get("GROWTHBOUND_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Ordered map; parallel when GROWTHBOUND_THREADS > 1 (results keep input order)."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _worst(values, ks, deltas, turns, sense):
    """Index of the worst value with tie-break (k, delta, turns)."""
    values = np.asarray(values, dtype=float)
    key = values if sense == ">=" else -values
    key = np.where(np.isnan(key), -np.inf, key)
    order = np.lexsort((np.asarray(turns, dtype=float), np.asarray(deltas, dtype=float), np.asarray(ks), key))
    return int(order[0])


def _make(name, k, values, deltas, turns, threshold, sense, required=True, slack=SLACK):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    turns_arr = np.zeros_like(values) if turns is None else np.atleast_1d(np.asarray(turns, dtype=float))
    i = _worst(values, np.full(values.shape, k), deltas, turns_arr, sense)
    v = float(values[i])
    ok = v >= threshold - slack if sense == ">=" else v <= threshold + slack
    where = (k, float(deltas[i]), None if turns is None else float(turns_arr[i]))
    return CertRecord(name, k, v, threshold, sense, bool(ok and not math.isnan(v)), where, required)


def constants_check(q=100):
    """The two numeric facts behind the tail estimate for lacunary series."""
    s = math.isqrt(q)
    head = q * 2.0 ** (-s)
    delta = q * math.ldexp(1.0, -(q * s - s))  # q 2^{-q^{3/2} + q^{1/2}}
    return {
        "q": q,
        "q_2_pow_minus_sqrt_q": head,
        "q_2_pow_minus_sqrt_q_le_eighth": head <= 0.125,
        "one_minus_delta": 1.0 - delta,
        "delta": delta,
        "delta_le_1e-10": delta <= 1e-10,
    }


# -- Bloch pairs -------------------------------------------------------------


def _bloch_series_terms(pair, which):
    prov = pair.provenance
    seq = prov["a"] if which == "f" else prov["b"]
    s = pair.f if which == "f" else pair.g
    return s, np.log(np.asarray(seq.values)), seq.offset


def _bloch_interval(pair, decay, which, k, grid, turns):
    """Records and profile rows for one function on one interval."""
    q, J = pair.provenance["q"], pair.provenance["J"]
    s, log_c, off = _bloch_series_terms(pair, which)
    d_left = float(q) ** (-(k + off))
    deltas = np.geomspace(d_left, d_left / math.sqrt(q), grid.radial)
    x = log_radius(deltas)
    exps = [float(n) for n in s.exponents]
    # log of a_j e_j r^{e_j}: the terms of |z| |s'(z)|
    T = np.array([lc + math.log(e) + e * x for lc, e in zip(log_c, exps)])  # (J, N)
    log_A = log_c[k - 1] + math.log(exps[k - 1])
    # geometric tail beyond J
    e_next = float(q) ** (J + 1 + off)
    log_rho = math.log(q) + e_next * (q - 1) * x
    if np.any(log_rho >= 0):
        raise ArgumentError("interval outside the truncation support; increase J")
    log_tail = log_c[-1] + math.log(e_next) + e_next * x - np.log(-np.expm1(log_rho))
    rel = T - log_A
    I = np.exp(rel[k - 1])
    II = np.exp(logsumexp(rel[: k - 1], axis=0)) if k > 1 else np.zeros_like(x)
    III_ret = np.exp(logsumexp(rel[k:], axis=0)) if k < J else np.zeros_like(x)
    III = III_ret + np.exp(log_tail - log_A)
    lb = I - II - III  # (|z| |s'|) / A, angle-free
    w = np.asarray(decay.at_delta(deltas), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lb > 0, np.exp(log_A + np.log(np.maximum(lb, 1e-300)) + np.log(deltas) - np.log(w)), 0.0)
    big_o = decay.is_constant_one
    tag = which
    recs = [
        _make(f"{tag}.I", k, I, deltas, None, 1.0 / 3.0, ">="),
        _make(f"{tag}.III", k, III, deltas, None, 0.1251, "<="),
        _make(f"{tag}.II+III", k, II + III, deltas, None, 1.0 / 7.0, "<="),
        _make(f"{tag}.floor", k, lb, deltas, None, 1.0 / 8.0, ">="),
        _make(f"{tag}.lower", k, ratio, deltas, None, 1.0 / 8.0, ">=", required=not big_o),
        _make(f"{tag}.lower_sqrt_q", k, ratio, deltas, None, 1.0 / (8.0 * math.sqrt(q)), ">="),
    ]
    # angular samples: |s'| on the grid
    la = log_abs_grid(s, deltas, turns, deriv=True)  # (N, M)
    ang = np.exp(la + np.log(deltas)[:, None] - np.log(w)[:, None])
    dd = np.broadcast_to(deltas[:, None], ang.shape).ravel()
    tt = np.broadcast_to(turns[None, :], ang.shape).ravel()
    recs.append(_make(f"{tag}.lower_angular", k, ang.ravel(), dd, tt, 1.0 / 8.0, ">=", required=False))
    # reverse triangle: |z s'| >= retained lower bound
    lb_ret = (I - II - III_ret) * np.exp(log_A)
    with np.errstate(divide="ignore"):
        cons = np.exp(la + x[:, None] - np.log(np.where(lb_ret > 0, lb_ret, np.nan))[:, None])
    cons = np.where(np.isnan(cons), np.inf, cons)
    recs.append(_make(f"{tag}.reverse_triangle", k, cons.ravel(), dd, tt, 1.0, ">="))
    return recs, deltas, ratio, la, w


def certify_bloch(pair, decay, q=None, grid=None):
    """Certify the derivative lower bounds of a Bloch or VMOA pair.

    f is checked on I_k = [1 - q^{-k}, 1 - q^{-(k+1/2)}] and g on
    [1 - q^{-(k+1/2)}, 1 - q^{-(k+1)}] for k in ``grid.k_range``.
    """
    if pair.kind not in ("bloch", "vmoa"):
        raise ArgumentError("certify_bloch needs a bloch or vmoa pair")
    grid = grid or CertGrid()
    q_pair, J = pair.provenance["q"], pair.provenance["J"]
    if q is not None and q != q_pair:
        raise ArgumentError("q does not match the pair")
    q = q_pair
    k_lo, k_hi = grid.k_range or (1, 6)
    if k_lo < 1 or k_hi < k_lo:
        raise ArgumentError("k_range must satisfy 1 <= A <= B")
    if k_hi > J - 1:
        raise ArgumentError(f"k_range up to {k_hi} exceeds truncation support (J = {J} needs B <= J - 1)")
    turns = golden_turns(grid.angles, grid.angle_offset)
    jobs = [(which, k) for k in range(k_lo, k_hi + 1) for which in ("f", "g")]
    results = _pmap(lambda job: _bloch_interval(pair, decay, job[0], job[1], grid, turns), jobs)

    report = CertReport(pair.kind)
    joint = math.inf
    rows = []
    for (which, k), (recs, deltas, ratio, la, w) in zip(jobs, results):
        report.records += recs
        joint = min(joint, float(np.min(ratio)))
        other = pair.g if which == "f" else pair.f
        lo = log_abs_grid(other, deltas, turns, deriv=True)
        log_target = np.log(w) - np.log(deltas)
        tot = np.logaddexp(la, lo) - log_target[:, None]
        lf, lg = (la, lo) if which == "f" else (lo, la)
        for i, d in enumerate(deltas):
            rows.append(_profile_row(d, log_target[i], lf[i].min(), lg[i].min(), tot[i].min()))
    rows.sort(key=lambda r: -r[0])
    report.profile = rows
    report.records.append(
        CertRecord("joint_lower", 0, joint, 0.0, ">=", joint > 0, (), True)
    )
    report.scale = 1.0 / joint if joint > 0 else math.inf
    c = constants_check(q)
    report.constants = {"q": q, "J": J, "k_min": k_lo, "k_max": k_hi, "decay": decay.describe(),
                        "delta_bound": c["delta"], "q_2_pow_minus_sqrt_q": c["q_2_pow_minus_sqrt_q"]}
    report.records.append(
        CertRecord("constants.head", 0, c["q_2_pow_minus_sqrt_q"], 0.125, "<=", c["q_2_pow_minus_sqrt_q_le_eighth"])
    )
    report.records.append(
        CertRecord("constants.delta", 0, c["one_minus_delta"], 1.0 - 1e-10, ">=", c["delta_le_1e-10"])
    )
    return report


# -- growth pairs ------------------------------------------------------------


def _growth_interval(pair, weight, env, log_nu, nu, k, grid, turns):
    K, h = env.K, env.h
    x_lo = env.x[k - 1]
    x_hi = min(env.x[k], env.x_end)
    if not x_hi > x_lo:
        return [], []
    xs = -np.geomspace(-x_lo, -x_hi, grid.radial)
    deltas = delta_from_x(xs)
    lt = log_nu[:, None] + env.lines(xs, integer=True)  # (K, N)
    parity = np.arange(1, K + 1) % 2
    same = (parity == k % 2) & (np.arange(1, K + 1) != k)
    ell_k = env.log_a[k - 1] + env.beta[k - 1] * xs
    log_tail = ell_k + _tail_log(h, K, k)
    # everything relative to the dominant term
    rel_others = np.exp(logsumexp(np.where(same[:, None], lt, -np.inf), axis=0) - lt[k - 1])
    rel_tail = np.exp(log_tail - lt[k - 1])
    rel_lb = 1.0 - rel_others - rel_tail
    shift = -float(env.n[0]) * xs if k % 2 == 1 else np.zeros_like(xs)  # f is divided by z^{n_1}
    log_w_hat = np.log(hat_w_at_x(nu, xs))
    log_omega = -weight.u(xs)
    base = lt[k - 1] + shift + log_omega - log_w_hat
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(rel_lb > 0, np.exp(base + np.log(np.where(rel_lb > 0, rel_lb, 1.0))), 0.0)
    odd = parity == 1
    log_f_up = np.logaddexp(logsumexp(np.where(odd[:, None], lt, -np.inf), axis=0), log_tail) - float(env.n[0]) * xs
    log_g_up = np.logaddexp(logsumexp(np.where(~odd[:, None], lt, -np.inf), axis=0), log_tail)
    upper = np.exp(np.logaddexp(log_f_up, log_g_up) + log_omega - log_w_hat)

    threshold = 0.9 * math.exp(-2.0 * h) / 5.0
    recs = [
        _make("lower", k, lower, deltas, None, threshold, ">="),
        _make("upper", k, upper, deltas, None, 20.0, "<="),
        _make("parity_f" if k % 2 else "parity_g", k, rel_lb, deltas, None, 4.0 / 9.0, ">="),
    ]
    # angular samples
    lf = log_abs_grid(pair.f, deltas, turns)
    lg = log_abs_grid(pair.g, deltas, turns)
    tot = np.logaddexp(lf, lg) + (log_omega - log_w_hat)[:, None]
    dd = np.broadcast_to(deltas[:, None], tot.shape).ravel()
    tt = np.broadcast_to(turns[None, :], tot.shape).ravel()
    recs.append(_make("lower_angular", k, np.exp(tot).ravel(), dd, tt, threshold, ">=", required=False))
    # reverse triangle on the responsible function (retained terms only)
    resp = lf if k % 2 else lg
    lb_ret = 1.0 - rel_others
    with np.errstate(divide="ignore", invalid="ignore"):
        log_lb = np.where(lb_ret > 0, lt[k - 1] + np.log(np.where(lb_ret > 0, lb_ret, 1.0)) + shift, np.nan)
    cons = np.exp(resp - log_lb[:, None])
    cons = np.where(np.isnan(cons), np.inf, cons)
    recs.append(_make("reverse_triangle", k, cons.ravel(), dd, tt, 1.0, ">="))
    log_target = log_w_hat - log_omega
    rows = [_profile_row(deltas[i], log_target[i], lf[i].min(), lg[i].min(), tot[i].min()) for i in range(xs.size)]
    return recs, rows


def certify_growth(pair, weight, decay, env, nu=None, grid=None, n_env_points=2000):
    """Certify the two-sided growth bounds of a growth pair.

    ``nu=None`` means the constant-one sequence (the big-O pair).  The pair
    must have gone through :func:`remove_common_zeros`.
    """
    if pair.kind != "growth":
        raise ArgumentError("certify_growth needs a growth pair")
    if pair.zero_report is None:
        raise PreconditionError("common zeros not removed; call remove_common_zeros first")
    if env.truncated:
        raise PreconditionError(
            f"envelope stops at 1 - r = {float(env.delta[-1]):.3g} before reaching r_max "
            f"({'; '.join(env.warnings)}); raise K_max or move r_max inward"
        )
    grid = grid or CertGrid()
    K = env.K
    if nu is None:
        from growthbound.coefficients import NuSeq

        nu = NuSeq(tuple([1.0] * K), tuple(env.x))
    log_nu = np.log(np.asarray(nu.values, dtype=float))
    if log_nu.size != K:
        raise ArgumentError("nu and envelope lengths differ")
    k_lo, k_hi = grid.k_range or (3, env.k_cover)
    if k_lo < 3 or k_hi > env.k_cover:
        raise ArgumentError(f"k_range must lie in 3..{env.k_cover} (annuli beyond t_2 up to r_max)")
    turns = golden_turns(grid.angles, grid.angle_offset)
    ks = list(range(k_lo, k_hi + 1))
    results = _pmap(lambda k: _growth_interval(pair, weight, env, log_nu, nu, k, grid, turns), ks)
    report = CertReport("growth")
    for recs, rows in results:
        report.records += recs
        report.profile += rows
    report.profile.sort(key=lambda r: -r[0])

    # inner disc |z| <= t_2: 50 radii x 64 angles
    frac = np.arange(50) / 49.0
    d2 = float(env.delta[2])
    deltas = (1.0 - frac) + frac * d2
    inner_turns = golden_turns(64)
    with np.errstate(divide="ignore"):
        lf = log_abs_grid(pair.f, deltas, inner_turns)
        lg = log_abs_grid(pair.g, deltas, inner_turns)
    tot = np.logaddexp(lf, lg)
    dd = np.broadcast_to(deltas[:, None], tot.shape).ravel()
    tt = np.broadcast_to(inner_turns[None, :], tot.shape).ravel()
    rec = _make("inner_disc", 0, tot.ravel(), dd, tt, -math.inf, ">=")
    report.records.append(
        CertRecord("inner_disc_log_min", 0, rec.value, -math.inf, ">", rec.value > -math.inf, rec.where)
    )

    env_rep = verify_envelope(env, weight, nu, n_points=n_env_points)
    for name, r in env_rep.records.items():
        k = r.where[0] if r.where else 0
        d = float(delta_from_x(r.where[1])) if r.where else math.nan
        report.records.append(
            CertRecord(f"env.{name}", k, r.value, r.threshold, r.sense, r.passed, (k, d, None) if r.where else ())
        )
    lows = [r.value for r in report.select("lower")]
    report.scale = 1.0 / min(lows) if lows and min(lows) > 0 else math.inf
    zr = pair.zero_report
    report.constants = {
        "h": env.h,
        "x0": float(env.x[0]),
        "K": K,
        "k_cover": env.k_cover,
        "k_min": k_lo,
        "k_max": k_hi,
        "delta_max": float(delta_from_x(env.x_end)),
        "lower_threshold": 0.9 * math.exp(-2.0 * env.h) / 5.0,
        "weight": weight.describe(),
        "decay": decay.describe() if decay is not None else "constant-one",
        "theta_turns": zr.theta_turns,
        "zero_removal": zr.method,
    }
    return report


# -- little-o profiles -------------------------------------------------------


@dataclass
class Profile:
    probe_deltas: np.ndarray
    M: np.ndarray
    grid_deltas: np.ndarray
    values: np.ndarray  # max over angles at each grid radius

    @property
    def ratio(self):
        return float(self.M[-1] / self.M[0])

    @property
    def little_o(self):
        return self.ratio <= 0.1

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.M) <= 0))

    @property
    def verdict(self):
        return "little-o" if self.little_o else "not little-o"

    def to_csv(self):
        rows = ["delta,M"] + [f"{d:.17g},{m:.17g}" for d, m in zip(self.probe_deltas, self.M)]
        return "\n".join(rows) + "\n"


def little_o_profile(series, weight, probe_deltas, deriv=False, angles=64, per_interval=16, window_end=None):
    """Suffix maxima M(r_i) of omega(rho) |s(z)| over rho >= r_i.

    ``series`` may be one series or a sequence (then the max over them is
    used).  ``probe_deltas`` are 1 - r_i, decreasing.  With ``deriv`` the
    Bloch variant (1 - rho^2) |s'(z)| is profiled and ``weight`` is ignored.
    The grid runs from the first probe to ``window_end`` (default: the last
    probe), geometric in delta.
    """
    probes = np.asarray(probe_deltas, dtype=float)
    if probes.ndim != 1 or probes.size < 2 or np.any(np.diff(probes) >= 0):
        raise ArgumentError("probe deltas must be strictly decreasing (radii increasing)")
    if np.any(probes <= 0) or np.any(probes > 1):
        raise ArgumentError("probe deltas must lie in (0, 1]")
    end = probes[-1] if window_end is None else float(window_end)
    if end > probes[-1]:
        raise ArgumentError("window end must lie beyond the last probe")
    knots = np.concatenate([probes, [end]]) if end < probes[-1] else probes
    pieces = [np.geomspace(a, b, per_interval) for a, b in zip(knots, knots[1:])]
    grid = np.unique(np.concatenate(pieces + [probes]))[::-1]  # decreasing delta
    many = series if isinstance(series, (list, tuple)) else [series]
    turns = golden_turns(angles)
    if deriv:
        log_fac = np.log(grid) + np.log(2.0 - grid)
    else:
        log_fac = weight.log_omega_delta(grid)
    with np.errstate(divide="ignore"):
        la = np.max([log_abs_grid(s, grid, turns, deriv=deriv).max(axis=1) for s in many], axis=0)
    values = np.exp(la + log_fac)
    suffix = np.maximum.accumulate(values[::-1])[::-1]  # max over delta' <= delta
    M = np.array([suffix[np.searchsorted(-grid, -d)] for d in probes])
    return Profile(probes, M, grid, values)
