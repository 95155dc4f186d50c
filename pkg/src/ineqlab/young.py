"""Young-function calculus.

A Young function is an even, convex cost function, increasing on [0, oo),
with alpha(0) = 0 and vanishing one-sided derivative at 0.  This module
provides the two-regime power family, tabulated (piecewise-linear) costs,
Fenchel-Legendre conjugation (closed form where available, certified
bracketed search otherwise), the doubling constant and the lower/upper
growth exponents, the conjugate-slope ratio driving Herbst-type arguments,
and the metric change d -> alpha(d)^(1/p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "YoungFunction",
    "PowerYoung",
    "ScaledYoung",
    "TabulatedYoung",
    "ExponentPair",
    "UnboundedConjugateError",
    "Delta2ViolationError",
    "conjugate",
    "conjugate_numeric",
    "exponents",
    "xi_value",
    "xi_numeric",
    "xi_upper_bound",
    "xi_cutoff",
    "epsilon_value",
    "power_extended",
    "change_metric",
    "validate_young",
    "load_table",
]


class UnboundedConjugateError(ValueError):
    """The supremum x*y - alpha(x) diverges on the search bracket."""


class Delta2ViolationError(ValueError):
    """The doubling ratio alpha(2x)/alpha(x) grows without bound."""


# Log grid used for every numeric sup/inf over u > 0.  The ratios involved
# are smooth in log u and the closed forms of the power family calibrate
# the resolution; 2049 points over twelve decades plus local refinement
# resolves them to far better than the 1e-5 acceptance tolerance.
_U_GRID = np.logspace(-6.0, 6.0, 2049)


def power_extended(base, exponent: float):
    """base**exponent with the convention base**inf = 0 if base <= 1 else inf.

    Used wherever an exponent 1/(r-1) degenerates at r = 1.
    """
    base = np.asarray(base, dtype=float)
    if math.isinf(exponent):
        out = np.where(base <= 1.0, 0.0, np.inf)
        return out if out.ndim else float(out)
    out = base**exponent
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ExponentPair:
    """Lower/upper growth exponents and the doubling constant of a cost.

    r_exp = inf_{x>0} x*alpha'_-(x)/alpha(x)  (>= 1),
    p_exp = sup_{x>0} x*alpha'_+(x)/alpha(x)  (in (1, oo) under doubling),
    delta2 = sup_{x>0} alpha(2x)/alpha(x)     (>= 2).
    """

    r_exp: float
    p_exp: float
    delta2: float

    def __post_init__(self):
        if not (1.0 <= self.r_exp <= self.p_exp):
            raise ValueError(f"need 1 <= r <= p, got r={self.r_exp}, p={self.p_exp}")
        if not (self.p_exp > 1.0):
            raise ValueError("upper exponent must exceed 1")

    @property
    def q_exp(self) -> float:
        """Conjugate exponent p/(p-1) of the upper growth exponent."""
        return self.p_exp / (self.p_exp - 1.0)


class YoungFunction:
    """Base class: an even convex cost, queried only on [0, oo)."""

    kind: str = "custom"

    def __call__(self, x):
        raise NotImplementedError

    def right_derivative(self, x):
        raise NotImplementedError

    def left_derivative(self, x):
        raise NotImplementedError

    def conjugate(self, y):
        """Fenchel-Legendre transform sup_x {x|y| - alpha(x)}."""
        y = np.asarray(y, dtype=float)
        if y.ndim == 0:
            return conjugate_numeric(self, float(y))
        return np.array([conjugate_numeric(self, v) for v in y.ravel()]).reshape(y.shape)

    def scale(self, c: float) -> "YoungFunction":
        """The cost c*alpha (still a Young function for c > 0)."""
        return ScaledYoung(self, c)

    def exponents(self) -> ExponentPair:
        return _exponents_numeric(self)


class PowerYoung(YoungFunction):
    """Two-regime power cost: |x|^p1 inside [0,1], matched p2-power outside.

    alpha(x) = |x|^p1 for |x| <= 1 and (p1/p2)|x|^p2 + 1 - p1/p2 for |x| > 1,
    which is C^1 at |x| = 1 with slope p1 on both sides.  Requires p1 >= 2
    (quadratic or flatter near 0) and p2 >= 1; p2 = 1 gives the
    quadratic-then-linear cost whose conjugate is finite only on [-p1, p1].
    """

    kind = "power"

    def __init__(self, p1: float, p2: float):
        if p1 < 2.0:
            raise ValueError(f"inner exponent must be >= 2, got {p1}")
        if p2 < 1.0:
            raise ValueError(f"outer exponent must be >= 1, got {p2}")
        self.p1 = float(p1)
        self.p2 = float(p2)

    def __repr__(self):
        return f"PowerYoung({self.p1:g}, {self.p2:g})"

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        inner = ax**self.p1
        outer = (self.p1 / self.p2) * ax**self.p2 + 1.0 - self.p1 / self.p2
        out = np.where(ax <= 1.0, inner, outer)
        return out if out.ndim else float(out)

    def right_derivative(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.where(ax <= 1.0, self.p1 * ax ** (self.p1 - 1.0),
                       self.p1 * ax ** (self.p2 - 1.0))
        return out if out.ndim else float(out)

    # C^1 matching at |x| = 1: left and right slopes agree everywhere.
    left_derivative = right_derivative

    def conjugate(self, y):
        """Closed form via the normalized-pair identity.

        With bar(x) = alpha(x)/p1, the conjugate of bar is the same
        two-regime function with the conjugate exponents q1, q2, so
        alpha*(y) = p1 * bar_{q1,q2}(y/p1).  q2 = oo when p2 = 1, in which
        case the conjugate is +oo beyond slope p1.
        """
        p1, p2 = self.p1, self.p2
        q1 = p1 / (p1 - 1.0)
        z = np.abs(np.asarray(y, dtype=float)) / p1
        inner = p1 * z**q1 / q1
        if p2 == 1.0:
            out = np.where(z <= 1.0, inner, np.inf)
        else:
            q2 = p2 / (p2 - 1.0)
            outer = p1 * (z**q2 / q2 + 1.0 / q1 - 1.0 / q2)
            out = np.where(z <= 1.0, inner, outer)
        return out if out.ndim else float(out)

    def exponents(self) -> ExponentPair:
        p = max(self.p1, self.p2)
        return ExponentPair(r_exp=min(self.p1, self.p2), p_exp=p, delta2=2.0**p)


class ScaledYoung(YoungFunction):
    """c * alpha for c > 0.  (c*alpha)*(y) = c * alpha*(y/c)."""

    kind = "scaled"

    def __init__(self, base: YoungFunction, c: float):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        self.base = base
        self.c = float(c)

    def __repr__(self):
        return f"ScaledYoung({self.base!r}, {self.c:g})"

    def __call__(self, x):
        return self.c * self.base(x)

    def right_derivative(self, x):
        return self.c * self.base.right_derivative(x)

    def left_derivative(self, x):
        return self.c * self.base.left_derivative(x)

    def conjugate(self, y):
        y = np.asarray(y, dtype=float)
        out = self.c * np.asarray(self.base.conjugate(y / self.c))
        return out if out.ndim else float(out)

    def exponents(self) -> ExponentPair:
        return self.base.exponents()  # ratios are scale invariant


class TabulatedYoung(YoungFunction):
    """Piecewise-linear interpolant of a sampled cost table.

    The table must start at (0, 0) with strictly increasing x and
    non-decreasing convex values.  One-sided derivatives are the exact
    segment slopes of the interpolant; beyond the last knot the final slope
    is extended, so the conjugate is finite only below that slope.
    """

    kind = "table"

    def __init__(self, xs, values):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
            raise ValueError("need matching 1-d arrays with at least two rows")
        if not (xs[0] == 0.0 and values[0] == 0.0):
            raise ValueError("table must start at (0, 0)")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("table abscissae must be strictly increasing")
        slopes = np.diff(values) / np.diff(xs)
        if np.any(slopes < -1e-15) or np.any(np.diff(slopes) < -1e-12):
            raise ValueError("table values must be non-decreasing and convex")
        self.xs = xs
        self.values = values
        self._slopes = np.maximum(slopes, 0.0)

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        inside = np.interp(ax, self.xs, self.values)
        beyond = self.values[-1] + self._slopes[-1] * (ax - self.xs[-1])
        out = np.where(ax <= self.xs[-1], inside, beyond)
        return out if out.ndim else float(out)

    def _slope_at(self, ax, side: str):
        # slope of the segment containing ax + 0 (side right) or ax - 0
        # (side left); the two differ only at knots
        idx = np.searchsorted(self.xs, ax, side="right" if side == "right" else "left")
        idx = np.clip(idx - 1, 0, self._slopes.size - 1)
        return self._slopes[idx]

    def right_derivative(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.where(ax >= self.xs[-1], self._slopes[-1], self._slope_at(ax, "right"))
        return out if out.ndim else float(out)

    def left_derivative(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.where(ax > self.xs[-1], self._slopes[-1], self._slope_at(ax, "left"))
        out = np.where(ax == 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def exponents(self) -> ExponentPair:
        # probe only where the table describes the cost: the first chord
        # (from the origin) and the linear extension beyond the last knot
        # carry growth ratio 1 by construction and would drag the lower
        # exponent there
        lo = self.xs[2] if self.xs.size > 3 else self.xs[1]
        grid = np.geomspace(lo, self.xs[-1] / 2.0, 2049)
        return _exponents_numeric(self, grid)


def load_table(path) -> TabulatedYoung:
    """Read a two-column text table (x, alpha(x)) into a tabulated cost.

    The origin row (0, 0) is implied by the Young axioms and prepended when
    the table starts at a positive abscissa.
    """
    data = np.loadtxt(path, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (x, alpha(x))")
    xs, values = data[:, 0], data[:, 1]
    if xs[0] > 0.0:
        xs = np.concatenate([[0.0], xs])
        values = np.concatenate([[0.0], values])
    return TabulatedYoung(xs, values)


# ---------------------------------------------------------------------------
# conjugation


def conjugate(alpha: YoungFunction, y: float):
    """alpha*(y), closed form when the cost provides one."""
    return alpha.conjugate(y)


def conjugate_numeric(alpha: YoungFunction, y: float, rel_tol: float = 1e-10,
                      bracket_cap: float = 1e12) -> float:
    """Golden-section maximization of the concave map x -> x|y| - alpha(x).

    The bracket [0, x_hi] is grown until the right slope of alpha exceeds
    |y|; if the slope stays below |y| up to ``bracket_cap`` the supremum is
    +oo (possible only for costs of bounded slope) and
    :class:`UnboundedConjugateError` is raised.
    """
    ay = abs(float(y))
    if ay == 0.0:
        return 0.0
    x_hi = 1.0
    while alpha.right_derivative(x_hi) < ay:
        x_hi *= 2.0
        if x_hi > bracket_cap:
            raise UnboundedConjugateError(
                f"slope never reaches {ay:g}; conjugate diverges")
    lo, hi = 0.0, x_hi
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc = c * ay - alpha(c)
    fd = d * ay - alpha(d)
    while hi - lo > rel_tol * max(1.0, hi):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = c * ay - alpha(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = d * ay - alpha(d)
    x = 0.5 * (lo + hi)
    return max(x * ay - alpha(x), 0.0)


# ---------------------------------------------------------------------------
# growth exponents


def _exponents_numeric(alpha: YoungFunction, grid=None) -> ExponentPair:
    u = _U_GRID if grid is None else np.asarray(grid, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        au = np.asarray(alpha(u), dtype=float)
        ok = (au > 0) & np.isfinite(au)
        u, au = u[ok], au[ok]
        ratios_lo = u * alpha.left_derivative(u) / au
        ratios_hi = u * alpha.right_derivative(u) / au
        doubling = alpha(2.0 * u) / au
    if not (np.all(np.isfinite(ratios_hi)) and np.all(np.isfinite(doubling))):
        raise Delta2ViolationError("growth overflows the probe grid")
    r = float(np.min(ratios_lo))
    p = float(np.max(ratios_hi))
    k = float(np.max(doubling))
    # doubling must saturate inside the grid; a ratio still climbing at the
    # top decade (or beyond any sane constant) signals a non-doubling cost
    tail = doubling[u > 1e4]
    if k > 1e6 or (tail.size > 8 and np.all(np.diff(tail) > 1e-9) and tail[-1] > 64.0):
        raise Delta2ViolationError(f"doubling ratio reaches {k:.3g} and keeps growing")
    return ExponentPair(r_exp=min(r, p), p_exp=p, delta2=max(k, 2.0))


def exponents(alpha: YoungFunction) -> ExponentPair:
    """Growth exponents (r, p) and doubling constant of the cost."""
    return alpha.exponents()


# ---------------------------------------------------------------------------
# conjugate-slope ratio


def xi_value(alpha: YoungFunction, x: float) -> float:
    """sup_{u>0} alpha*(x alpha'_+(u)) / (x alpha(u)) for x > 0.

    Non-decreasing in x, possibly +oo.  Closed form for the power family;
    numeric grid supremum otherwise.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    if isinstance(alpha, PowerYoung):
        return _xi_power(alpha, x)
    if isinstance(alpha, ScaledYoung):
        return xi_value(alpha.base, x)  # invariant under scaling
    return xi_numeric(alpha, x)


def _xi_power(alpha: PowerYoung, x: float) -> float:
    p1, p2 = alpha.p1, alpha.p2
    p = max(p1, p2)
    if x <= 1.0:
        return (p - 1.0) * x ** (1.0 / (p - 1.0))
    if p2 == 1.0:
        # bounded slope: the conjugate is infinite beyond slope p1, and for
        # x > 1 the argument x*alpha'(u) exceeds p1 at large u
        return math.inf
    q1 = p1 / (p1 - 1.0)
    q2 = p2 / (p2 - 1.0)
    if p1 >= p2:
        return p1 * (x ** (1.0 / (p2 - 1.0)) / q2 + (1.0 / q1 - 1.0 / q2) / x)
    return max((p1 - 1.0) * x ** (1.0 / (p1 - 1.0)),
               (p2 - 1.0) * x ** (1.0 / (p2 - 1.0)))


def xi_numeric(alpha: YoungFunction, x: float, overflow: float = 1e12) -> float:
    """Grid supremum of alpha*(x alpha'_+(u))/(x alpha(u)) with refinement.

    Returns +oo as soon as a sampled conjugate value is infinite or the
    running supremum exceeds ``overflow``.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    u = _U_GRID
    au = alpha(u)
    ok = au > 0
    u, au = u[ok], au[ok]
    args = x * alpha.right_derivative(u)
    try:
        conj = np.asarray(alpha.conjugate(args), dtype=float)
    except UnboundedConjugateError:
        return math.inf
    ratios = conj / (x * au)
    if not np.all(np.isfinite(ratios)):
        return math.inf
    best = float(np.max(ratios))
    if best > overflow:
        return math.inf
    k = int(np.argmax(ratios))
    lo = u[max(k - 1, 0)]
    hi = u[min(k + 1, u.size - 1)]

    def f(v):
        val = alpha.conjugate(float(x * alpha.right_derivative(v)))
        return val / (x * alpha(v))

    # ternary refinement in log u around the grid argmax
    llo, lhi = math.log(lo), math.log(hi)
    try:
        for _ in range(80):
            m1 = llo + (lhi - llo) / 3.0
            m2 = lhi - (lhi - llo) / 3.0
            if f(math.exp(m1)) < f(math.exp(m2)):
                llo = m1
            else:
                lhi = m2
        best = max(best, f(math.exp(0.5 * (llo + lhi))))
    except UnboundedConjugateError:
        return math.inf
    return best if best <= overflow else math.inf


def xi_upper_bound(exp_pair: ExponentPair, x: float) -> float:
    """(p-1) max(x^{1/(p-1)}, x^{1/(r-1)}) with the x**oo convention."""
    r, p = exp_pair.r_exp, exp_pair.p_exp
    a = x ** (1.0 / (p - 1.0))
    b = power_extended(x, math.inf if r == 1.0 else 1.0 / (r - 1.0))
    return (p - 1.0) * max(a, b)


def xi_cutoff(alpha: YoungFunction) -> float:
    """sup { t >= 0 : xi(t) < oo }; >= 1 under the doubling condition."""
    pair = exponents(alpha)
    if pair.r_exp > 1.0:
        return math.inf
    # bounded-slope regime: locate the overflow threshold numerically
    lo, hi = 1.0, 1.0
    while math.isfinite(xi_value(alpha, hi)) and hi < 1e8:
        lo = hi
        hi *= 2.0
    if hi >= 1e8:
        return math.inf
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if math.isfinite(xi_value(alpha, mid)):
            lo = mid
        else:
            hi = mid
    return lo


def epsilon_value(p: float, t: float) -> float:
    """Overhead factor (1 - t^{1/(p-1)})^{-(p-1)} - 1 on [0, 1).

    Non-decreasing, 0 at t = 0, diverging as t -> 1.  At p = 2 it reduces
    to t/(1-t).
    """
    if not p > 1.0:
        raise ValueError("exponent must exceed 1")
    if not 0.0 <= t < 1.0:
        raise ValueError(f"t must lie in [0, 1), got {t}")
    if t == 0.0:
        return 0.0
    return 1.0 / (1.0 - t ** (1.0 / (p - 1.0))) ** (p - 1.0) - 1.0


# ---------------------------------------------------------------------------
# metric change and validation


def change_metric(alpha: YoungFunction, space):
    """Replace distances by alpha(d)^(1/p); subadditivity of alpha^(1/p)
    makes the result a metric again, which is re-validated here."""
    from . import spaces  # local import; spaces does not import young

    p = exponents(alpha).p_exp
    d = alpha(space.dist) ** (1.0 / p)
    np.fill_diagonal(d, 0.0)
    out = spaces.FiniteMetricSpace(labels=space.labels, dist=d, coords=space.coords)
    problems = out.validate()
    if problems:
        raise ValueError(f"changed metric failed validation: {problems}")
    return out


def validate_young(alpha: YoungFunction, grid=None) -> list[str]:
    """Sampled diagnostics of the Young axioms; empty list means valid."""
    xs = np.linspace(0.0, 10.0, 501)[1:] if grid is None else np.asarray(grid)
    problems = []
    if abs(float(alpha(0.0))) > 1e-12:
        problems.append("alpha(0) != 0")
    if float(alpha.right_derivative(0.0)) > 1e-6:
        problems.append("right derivative at 0 is not 0")
    if np.max(np.abs(alpha(xs) - alpha(-xs))) > 1e-12:
        problems.append("not even")
    dp = alpha.right_derivative(xs)
    dm = alpha.left_derivative(xs)
    if np.any(dp <= 0.0):
        problems.append("right derivative not positive on x > 0")
    if np.any(dm - dp > 1e-12):
        problems.append("left derivative exceeds right derivative")
    if np.any(np.diff(dp) < -1e-9 * np.maximum(1.0, dp[:-1])):
        problems.append("right derivative not non-decreasing (convexity fails)")
    return problems
