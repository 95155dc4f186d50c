"""Closed-form and quadrature constants linking the inequalities.

Everything here is a deterministic function of the cost alpha and the
premise constants (A, lambda): the plus/minus route transport constants,
the sharp threshold t with xi(t) < 1/A, the Herbst growth factor, the
integral-limit constant of the minus route, the conversion factor kappa
and its perturbation analogue, and the Lipschitz-tail coefficient a_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .young import (
    ExponentPair,
    YoungFunction,
    epsilon_value,
    exponents,
    xi_cutoff,
    xi_value,
)

__all__ = [
    "ConstantBundle",
    "ThresholdZeroError",
    "kappa",
    "kappa_tilde",
    "holley_factor_numeric",
    "lipschitz_tail_coefficient",
    "t_threshold",
    "growth_factor",
    "minus_route_constant",
    "tau_lsi_transport_constant",
    "implication_constants",
]


class ThresholdZeroError(ValueError):
    """xi(t) >= 1/A already at the smallest sampled t."""


def kappa(p: float) -> float:
    """p^{p(p-1)} / (p-1)^{(p-1)^2}; equals 4 at p = 2."""
    return p ** (p * (p - 1.0)) / (p - 1.0) ** ((p - 1.0) ** 2)


def kappa_tilde(p: float) -> float:
    """p^{p^2} / (p-1)^{p(p-1)}; equals 16 at p = 2."""
    return p ** (p * p) / (p - 1.0) ** (p * (p - 1.0))


def holley_factor_numeric(p: float) -> float:
    """kappa(p) * inf_{s in (0,1)} 1/(s (1-s)^{p-1}).

    The infimum is attained at s = 1/p and the product collapses to
    kappa_tilde(p); computing it numerically cross-checks both formulas.
    """
    res = minimize_scalar(lambda s: 1.0 / (s * (1.0 - s) ** (p - 1.0)),
                          bounds=(1e-9, 1.0 - 1e-9), method="bounded",
                          options={"xatol": 1e-13})
    return kappa(p) * float(res.fun)


def _overhead_integral(p: float, t: float) -> float:
    """int_0^t eps(u)/u du with the substitution u = v^(p-1).

    eps(u) ~ (p-1) u^{1/(p-1)} near 0, so the raw integrand has an
    integrable endpoint singularity for p > 2; in the v variable it is
    bounded (limit (p-1)^2 at v = 0).
    """
    if t == 0.0:
        return 0.0
    pm1 = p - 1.0

    def f(v):
        u = v**pm1
        return epsilon_value(p, u) / u * pm1 * v ** (pm1 - 1.0) if u > 0 else pm1 * pm1

    val, _ = quad(f, 0.0, t ** (1.0 / pm1), epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def lipschitz_tail_coefficient(p: float, omega: float) -> float:
    """inf_{t in (0,1)} t^{-(q-1)} (1 + (p/omega)^q/(p-1) int_0^t eps(u)/u du).

    omega = 1 holds in any metric space, omega = p on geodesic spaces.
    At p = 2 the values are about 7.53 (omega 1) and 3.15 (omega 2).
    """
    if omega < 1.0:
        raise ValueError("omega must be >= 1")
    q = p / (p - 1.0)
    coef = (p / omega) ** q / (p - 1.0)

    def obj(t):
        return (1.0 + coef * _overhead_integral(p, t)) / t ** (q - 1.0)

    res = minimize_scalar(obj, bounds=(1e-6, 1.0 - 1e-9), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.fun)


def t_threshold(alpha: YoungFunction, a_premise: float) -> float:
    """sup { t : xi(t) < 1/A }, by bisection on the non-decreasing xi."""
    if a_premise <= 0:
        raise ValueError("premise constant must be positive")
    target = 1.0 / a_premise
    lo = 1e-12
    if xi_value(alpha, lo) >= target:
        raise ThresholdZeroError("xi already exceeds 1/A near 0")
    hi = 1.0
    while xi_value(alpha, hi) < target:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if xi_value(alpha, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, lo):
            break
    return lo


def _herbst_integral(alpha: YoungFunction, a_premise: float, t: float,
                     sign: float, p: float) -> float:
    """int_0^t A xi(u) / (u (1 + sign * A xi(u))) du, u = v^(p-1).

    xi(u) = (p-1) u^{1/(p-1)} for small u, so the substituted integrand is
    bounded near 0 with limit A (p-1)^2.
    """
    if t == 0.0:
        return 0.0
    pm1 = p - 1.0

    def f(v):
        u = v**pm1
        if u == 0.0:
            return a_premise * pm1 * pm1
        x = xi_value(alpha, u)
        return a_premise * x / (u * (1.0 + sign * a_premise * x)) * pm1 * v ** (pm1 - 1.0)

    val, _ = quad(f, 0.0, t ** (1.0 / pm1), epsabs=1e-10, epsrel=1e-10, limit=400)
    return val


def growth_factor(alpha: YoungFunction, a_premise: float, t: float) -> float:
    """exp int_0^t A xi/(u (1 - A xi)) du, finite for t below the threshold."""
    p = exponents(alpha).p_exp
    if t >= t_threshold(alpha, a_premise):
        raise ValueError("t must stay below the threshold sup{xi < 1/A}")
    return math.exp(_herbst_integral(alpha, a_premise, t, -1.0, p))


def minus_route_constant(alpha: YoungFunction, a_premise: float,
                         rel_tol: float = 1e-8) -> float:
    """lim_{t -> cutoff} (1/t) exp int_0^t A xi/(u (1 + A xi)) du.

    The map t -> (1/t) exp(...) is non-increasing.  When the cutoff is
    finite (lower exponent 1) the limit is the value at the cutoff; when it
    is infinite the integration range grows geometrically until the value
    stabilizes to ``rel_tol``.
    """
    p = exponents(alpha).p_exp
    cut = xi_cutoff(alpha)

    def value_at(t):
        return math.exp(_herbst_integral(alpha, a_premise, t, +1.0, p)) / t

    if math.isfinite(cut):
        return value_at(cut)
    t = 1.0
    prev = value_at(t)
    for _ in range(60):
        t *= 4.0
        cur = value_at(t)
        if abs(prev - cur) <= rel_tol * abs(cur):
            return cur
        prev = cur
    return prev


def tau_lsi_transport_constant(p: float, a_premise: float, lam: float) -> float:
    """kappa(p) max(A, 1)^{p-1} / lambda: the transport constant guaranteed
    by an inf-convolution log-Sobolev premise (lambda, A)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return kappa(p) * max(a_premise, 1.0) ** (p - 1.0) / lam


@dataclass(frozen=True)
class ConstantBundle:
    """Every constant derivable from (alpha, A, lambda).

    c_plus / c_minus are the plus/minus route transport constants; the
    sharp variants come from the threshold t and the integral limit.
    a_general / a_geodesic are the Lipschitz-tail coefficients at omega = 1
    and omega = p.  holley_factor is the perturbation conversion factor,
    numerically identical to kappa_tilde.
    """

    alpha: YoungFunction = field(repr=False)
    a_premise: float
    lam: float
    exps: ExponentPair
    c_plus: float
    c_minus: float
    t_threshold: float
    c_from_threshold: float
    b_minus: float
    kappa: float
    kappa_tilde: float
    holley_factor: float
    c_from_tau_lsi: float
    a_general: float
    a_geodesic: float

    def xi(self, x: float) -> float:
        return xi_value(self.alpha, x)

    def epsilon(self, t: float) -> float:
        return epsilon_value(self.exps.p_exp, t)

    def growth_factor(self, t: float) -> float:
        return growth_factor(self.alpha, self.a_premise, t)

    def as_dict(self) -> dict:
        return {
            "a_premise": self.a_premise,
            "lambda": self.lam,
            "r_exp": self.exps.r_exp,
            "p_exp": self.exps.p_exp,
            "delta2": self.exps.delta2,
            "c_plus": self.c_plus,
            "c_minus": self.c_minus,
            "t_threshold": self.t_threshold,
            "c_from_threshold": self.c_from_threshold,
            "b_minus": self.b_minus,
            "kappa": self.kappa,
            "kappa_tilde": self.kappa_tilde,
            "holley_factor": self.holley_factor,
            "c_from_tau_lsi": self.c_from_tau_lsi,
            "a_general": self.a_general,
            "a_geodesic": self.a_geodesic,
        }


def implication_constants(alpha: YoungFunction, a_premise: float,
                          lam: float) -> ConstantBundle:
    """Compute the full constant bundle for a cost and premise (A, lambda).

    c_plus  = max(((p-1)A)^{r-1}, ((p-1)A)^{p-1})
    c_minus = (1 + (p-1)A)^{p-r} ((p-1)A)^{r-1}   (>= b_minus)
    and the sharp threshold / integral-limit variants alongside the
    conversion factors.  For the quadratic cost all four transport
    constants collapse to A.
    """
    if a_premise <= 0 or lam <= 0:
        raise ValueError("premise constants must be positive")
    exps = exponents(alpha)
    r, p = exps.r_exp, exps.p_exp
    base = (p - 1.0) * a_premise
    c_plus = max(base ** (r - 1.0), base ** (p - 1.0))
    c_minus = (1.0 + base) ** (p - r) * base ** (r - 1.0)
    t_a = t_threshold(alpha, a_premise)
    return ConstantBundle(
        alpha=alpha,
        a_premise=a_premise,
        lam=lam,
        exps=exps,
        c_plus=c_plus,
        c_minus=c_minus,
        t_threshold=t_a,
        c_from_threshold=1.0 / t_a,
        b_minus=minus_route_constant(alpha, a_premise),
        kappa=kappa(p),
        kappa_tilde=kappa_tilde(p),
        holley_factor=holley_factor_numeric(p),
        c_from_tau_lsi=tau_lsi_transport_constant(p, a_premise, lam),
        a_general=lipschitz_tail_coefficient(p, 1.0),
        a_geodesic=lipschitz_tail_coefficient(p, p),
    )
