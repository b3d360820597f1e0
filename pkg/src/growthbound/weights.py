"""Radial weights, decay functions and the log-coordinate view.

A radial weight ``omega`` is handled mostly through

    u(x) = -log omega(e^x),    x = log r < 0,

which is convex exactly when ``1/omega`` is log-convex.  Radii close to the
unit circle are passed around as ``delta = 1 - r`` or as ``x`` so that
annuli like ``1 - 1e-40 < r`` stay representable.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from growthbound._numeric import delta_from_x, log_delta_from_x
from growthbound.errors import ArgumentError, DomainError

__all__ = [
    "RadialWeight",
    "DecayFunction",
    "ConvexityReport",
    "eval_weight",
    "eval_log_weight",
    "check_log_convex",
    "normalize_decay",
]

_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("exp", "log", "log1p", "expm1", "sqrt", "cos", "sin", "abs", "pi", "e")
}


def _eval_expr(expr, r, d):
    return np.asarray(eval(expr, {"__builtins__": {}}, dict(_EXPR_NAMESPACE, r=r, d=d)), dtype=float)


@dataclass(frozen=True)
class RadialWeight:
    """A radial weight omega(r) on [0, 1).

    Use the constructors :meth:`power`, :meth:`exponential`, :meth:`table`
    and :meth:`custom` rather than building the dataclass directly.
    """

    family: str
    params: dict = field(default_factory=dict)

    @classmethod
    def power(cls, alpha=1.0):
        """omega(r) = (1 - r)**alpha."""
        if not alpha > 0:
            raise ArgumentError("power weight needs alpha > 0")
        return cls("power", {"alpha": float(alpha)})

    @classmethod
    def exponential(cls, c=1.0, p=1.0):
        """omega(r) = exp(-c / (1 - r)**p)."""
        if not (c > 0 and p > 0):
            raise ArgumentError("exponential weight needs c > 0 and p > 0")
        return cls("exponential", {"c": float(c), "p": float(p)})

    @classmethod
    def table(cls, r, omega):
        """Sampled weight, interpolated piecewise linearly in (x, u(x)).

        Evaluation outside ``[min(r), max(r)]`` raises :class:`DomainError`.
        """
        r = np.asarray(r, dtype=float)
        omega = np.asarray(omega, dtype=float)
        if r.ndim != 1 or r.shape != omega.shape or r.size < 2:
            raise ArgumentError("table weight needs two equal-length sample arrays (>= 2 points)")
        if np.any(np.diff(r) <= 0) or r[0] <= 0 or r[-1] >= 1:
            raise ArgumentError("table radii must be strictly increasing inside (0, 1)")
        if np.any(omega <= 0):
            raise ArgumentError("table weight values must be positive")
        return cls("table", {"x": tuple(np.log(r)), "u": tuple(-np.log(omega))})

    @classmethod
    def custom(cls, expr):
        """omega given by an expression in ``r`` and ``d = 1 - r`` (numpy names allowed)."""
        _eval_expr(expr, np.array([0.5]), np.array([0.5]))
        return cls("custom", {"expr": str(expr)})

    # -- log-coordinate view -------------------------------------------------

    def u(self, x):
        """u(x) = -log omega(e^x), vectorised over ``x < 0``."""
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        if fam == "power":
            return -p["alpha"] * log_delta_from_x(x)
        if fam == "exponential":
            return p["c"] * delta_from_x(x) ** (-p["p"])
        if fam == "table":
            xs, us = np.asarray(p["x"]), np.asarray(p["u"])
            if np.any(x < xs[0]) or np.any(x > xs[-1]):
                raise DomainError("table weight evaluated outside its sampled range")
            return np.interp(x, xs, us)
        if fam == "custom":
            return -np.log(_eval_expr(p["expr"], np.exp(x), delta_from_x(x)))
        raise ArgumentError(f"unknown weight family {fam!r}")

    def du(self, x):
        """Slope u'(x); left slope at table kinks, finite difference for custom."""
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.params
        if fam == "power":
            return p["alpha"] * np.exp(x) / delta_from_x(x)
        if fam == "exponential":
            return p["c"] * p["p"] * np.exp(x) * delta_from_x(x) ** (-p["p"] - 1.0)
        if fam == "table":
            xs, us = np.asarray(p["x"]), np.asarray(p["u"])
            slopes = np.diff(us) / np.diff(xs)
            idx = np.clip(np.searchsorted(xs, x, side="left") - 1, 0, slopes.size - 1)
            return slopes[idx]
        if fam == "custom":
            # relative step keeps x +- step < 0 when x is tiny
            step = 1e-7 * np.minimum(1.0, np.abs(x))
            return (self.u(x + step) - self.u(x - step)) / (2.0 * step)
        raise ArgumentError(f"unknown weight family {fam!r}")

    def x_max(self):
        """Largest admissible x (0 for analytic families, last sample for tables)."""
        if self.family == "table":
            return self.params["x"][-1]
        return 0.0

    def log_omega_delta(self, delta):
        """log omega(1 - delta), accurate for tiny ``delta``."""
        delta = np.asarray(delta, dtype=float)
        fam, p = self.family, self.params
        if fam == "power":
            return p["alpha"] * np.log(delta)
        if fam == "exponential":
            return -p["c"] * delta ** (-p["p"])
        return -self.u(np.log1p(-delta))

    def describe(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items() if k in ("alpha", "c", "p", "expr"))
        return f"{self.family}({args})"


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)) or np.any(r >= 1):
        raise DomainError("radius must lie in [0, 1)")
    return r


def eval_weight(weight, r):
    """omega(r) for 0 <= r < 1."""
    r = _check_r(r)
    out = np.exp(weight.log_omega_delta(1.0 - r))
    return float(out) if out.ndim == 0 else out


def eval_log_weight(weight, x):
    """u(x) = -log omega(e^x) for x < 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x < 0)):
        raise DomainError("log-coordinate x must be negative")
    out = weight.u(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    min_second_difference: float
    argmin: int
    violation: tuple = None  # (i-1, i, i+1, x_{i-1}, x_i, x_{i+1}) of the first violating triple
    tol: float = 1e-9


def check_log_convex(weight, x_grid, tol=1e-9):
    """Discrete convexity test of u on ``x_grid``.

    For each consecutive triple the second difference is
    ``2 * (chord(x_i) - u(x_i))``, which reduces to
    ``u[i-1] - 2 u[i] + u[i+1]`` on a uniform grid.  The weight passes when
    every second difference is >= -tol.
    """
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ArgumentError("check_log_convex needs at least 3 grid points")
    if np.any(np.diff(x) <= 0) or np.any(x >= 0):
        raise ArgumentError("x_grid must be strictly increasing and negative")
    u = weight.u(x)
    left, mid, right = x[:-2], x[1:-1], x[2:]
    span = right - left
    chord = u[:-2] * (right - mid) / span + u[2:] * (mid - left) / span
    d2 = 2.0 * (chord - u[1:-1])
    i = int(np.argmin(d2))
    bad = np.flatnonzero(d2 < -tol)
    violation = None
    if bad.size:
        j = int(bad[0]) + 1
        violation = (j - 1, j, j + 1, float(x[j - 1]), float(x[j]), float(x[j + 1]))
    return ConvexityReport(
        passed=bad.size == 0,
        min_second_difference=float(d2[i]),
        argmin=i + 1,
        violation=violation,
        tol=tol,
    )


def check_radial_weight(weight, n=200):
    """Sample-grid check of positivity, strict decrease and decay to 0.

    Returns a list of problems (empty when the weight is admissible).
    """
    problems = []
    if weight.family == "table":
        xs = np.linspace(weight.params["x"][0], weight.params["x"][-1], n)
        delta = delta_from_x(xs)
        lo = weight.log_omega_delta(delta)
        if np.any(np.diff(lo) >= 0):
            problems.append("weight is not strictly decreasing on the sample grid")
        return problems
    delta = np.geomspace(1.0, 1e-8, n)
    lo = weight.log_omega_delta(delta)
    if not np.all(np.isfinite(lo)):
        problems.append("weight is not positive and finite on [0, 1)")
    elif np.any(np.diff(lo) >= 0):
        problems.append("weight is not strictly decreasing on the sample grid")
    elif not lo[-1] < lo[0] + math.log(1e-3):
        problems.append("weight does not tend to 0: omega(1-1e-8) >= 1e-3 * omega(0)")
    return problems


@dataclass(frozen=True)
class DecayFunction:
    """The little-o rate W: non-increasing, positive, W(r) -> 0 as r -> 1.

    ``W(r) = min(cap, factor * base(r))`` where ``base`` is the family:

    * ``inverse-log``: ``min(1, scale / |log(1 - r)|)``
    * ``power``: ``(1 - r)**gamma``
    * ``table``: linear interpolation in ``-log(1 - r)``, clamped at both ends
    * ``constant-one``: ``1`` (degenerate big-O mode)
    """

    family: str
    params: dict = field(default_factory=dict)
    factor: float = 1.0
    cap: float = math.inf

    @classmethod
    def inverse_log(cls, scale=1.0):
        return cls("inverse-log", {"scale": float(scale)})

    @classmethod
    def power(cls, gamma=0.5):
        if not gamma > 0:
            raise ArgumentError("power decay needs gamma > 0")
        return cls("power", {"gamma": float(gamma)})

    @classmethod
    def table(cls, r, values):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or r.size < 2:
            raise ArgumentError("table decay needs two equal-length sample arrays (>= 2 points)")
        if np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] >= 1:
            raise ArgumentError("table radii must be strictly increasing inside [0, 1)")
        if np.any(values <= 0) or np.any(np.diff(values) > 0):
            raise ArgumentError("table decay values must be positive and non-increasing")
        return cls("table", {"L": tuple(-np.log1p(-r)), "W": tuple(values)})

    @classmethod
    def constant_one(cls):
        return cls("constant-one", {})

    @property
    def is_constant_one(self):
        return self.family == "constant-one"

    def _base(self, delta):
        fam, p = self.family, self.params
        if fam == "inverse-log":
            with np.errstate(divide="ignore"):
                return np.minimum(1.0, p["scale"] / np.abs(np.log(delta)))
        if fam == "power":
            return delta ** p["gamma"]
        if fam == "table":
            return np.interp(-np.log(delta), p["L"], p["W"])
        if fam == "constant-one":
            return np.ones_like(delta)
        raise ArgumentError(f"unknown decay family {fam!r}")

    def at_delta(self, delta):
        """W(1 - delta), vectorised."""
        delta = np.asarray(delta, dtype=float)
        out = np.minimum(self.cap, self.factor * self._base(delta))
        return float(out) if out.ndim == 0 else out

    def at(self, r):
        r = _check_r(r)
        return self.at_delta(1.0 - r)

    def at_x(self, x):
        return self.at_delta(delta_from_x(x))

    def describe(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items() if k in ("scale", "gamma"))
        return f"{self.family}({args})"


def normalize_decay(decay):
    """Rescale so that W(0) = 1: returns r -> min(1, W(r) / W(0))."""
    w0 = decay.at_delta(1.0)
    if not w0 > 0:
        raise ArgumentError("W(0) must be positive")
    return replace(decay, factor=decay.factor / w0, cap=1.0)
