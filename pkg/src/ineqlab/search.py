"""Search engines behind the constant estimators.

Two regimes, both returning certified *lower* bounds (a supremum is only
ever approached from below by evaluation):

* dense scans over explicit candidate grids, effectively exhaustive on
  two- and three-point spaces;
* seeded multistart projected ascent with finite-difference (or supplied)
  gradients, step halving, and a simplex-interior clamp.

Degeneracy handling: on a finite space the entropy of a small perturbation
of mu is quadratic in its size while the transport cost is linear, so the
cost/entropy ratio diverges along shrinking perturbations and the true
supremum is infinite.  Scans therefore restrict to candidates with
relative entropy at least ``ENTROPY_FLOOR`` and report the exclusion; the
floor is matched to the dual-check gap tolerance (floor = 4 * gap), which
makes the primal scan and the dual bisection agree to leading order on
two-point spaces.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "DUAL_GAP_TOL",
    "ENTROPY_FLOOR",
    "DENOM_FLOOR",
    "SearchBudget",
    "ScanOutcome",
    "simplex_grid",
    "two_point_sources",
    "pair_swap_shell",
    "dirichlet_starts",
    "multistart_maximize",
]

DUAL_GAP_TOL = 1e-6
# Matched cutoffs: the largest dual level passing at gap tolerance tau and
# the primal scan constant at entropy floor h coincide (to leading order in
# the local quadratic expansions) exactly when h = 4 * tau.
ENTROPY_FLOOR = 4.0 * DUAL_GAP_TOL
DENOM_FLOOR = 1e-14


@dataclass(frozen=True)
class SearchBudget:
    """Reproducible optimizer budget (embedded in reports)."""

    starts: int = 50
    iterations: int = 500
    fd_step: float = 1e-6
    clamp: float = 1e-9
    initial_step: float = 0.05


@dataclass(frozen=True)
class ScanOutcome:
    """Result of a supremum search over an explicit candidate set."""

    value: float
    argmax: np.ndarray = field(repr=False)
    n_candidates: int
    n_excluded: int
    method: str
    at_exclusion_boundary: bool = False


def simplex_grid(k: int, step: float, clamp: float = 1e-9) -> np.ndarray:
    """Uniform grid over the interior of the probability simplex (k <= 3)."""
    if k == 2:
        s = np.arange(step, 1.0, step)
        return np.column_stack([s, 1.0 - s])
    if k == 3:
        a = np.arange(step, 1.0, step)
        w0, w1 = np.meshgrid(a, a, indexing="ij")
        mask = w0 + w1 < 1.0 - clamp
        w0, w1 = w0[mask], w1[mask]
        return np.column_stack([w0, w1, 1.0 - w0 - w1])
    raise ValueError("simplex grids provided for 2 or 3 points only")


def two_point_sources(mu: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Signed-perturbation family (mu0 + s, mu1 - s) on a two-point space."""
    smax = min(mu[0], mu[1])
    s = np.arange(step, smax, step)
    s = np.concatenate([s, -s])
    out = np.column_stack([mu[0] + s, mu[1] - s])
    return out[(out > 0).all(axis=1)]


def pair_swap_shell(mu: np.ndarray, entropy, floor: float,
                    levels=(1.0000001, 2.0, 10.0)) -> np.ndarray:
    """Sources mu + s (e_i - e_j) placed just outside the entropy floor.

    These are the directions along which the cost/entropy ratio diverges;
    pinning candidates to prescribed entropy levels makes the floored scan
    supremum grid-independent.
    """
    out = []
    n = mu.size
    for i in range(n):
        for j in range(n):
            if i == j or mu[j] <= 0:
                continue
            direction = np.zeros(n)
            direction[i], direction[j] = 1.0, -1.0
            smax = mu[j] * (1.0 - 1e-9)

            def h_of(s):
                return entropy(mu + s * direction)

            if h_of(smax) <= floor:
                continue
            for level in levels:
                target = floor * level
                if h_of(smax) <= target:
                    continue
                s = brentq(lambda v: h_of(v) - target, 1e-15, smax, xtol=1e-15)
                out.append(mu + s * direction)
    return np.array(out) if out else np.empty((0, n))


def dirichlet_starts(rng: np.random.Generator, n: int, count: int,
                     clamp: float = 1e-9) -> np.ndarray:
    """Random interior simplex points (symmetric Dirichlet, clamped)."""
    w = rng.dirichlet(np.ones(n), size=count)
    w = np.clip(w, clamp, None)
    return w / w.sum(axis=1, keepdims=True)


def project_simplex_interior(x: np.ndarray, clamp: float = 1e-9) -> np.ndarray:
    w = np.clip(x, clamp, None)
    return w / w.sum()


def worker_count() -> int:
    """Worker cap from INEQ_LAB_THREADS; defaults to serial execution."""
    try:
        return max(1, int(os.environ.get("INEQ_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _ascend(objective, start, project, budget: SearchBudget, gradient):
    """Projected ascent from one start; returns (best value, point, evals)."""
    x = project(np.asarray(start, dtype=float))
    fx = float(objective(x[None, :])[0])
    n_evals = 1
    if not np.isfinite(fx):
        return -np.inf, None, n_evals
    best_val, best_x = fx, x.copy()
    step = budget.initial_step
    for _ in range(budget.iterations):
        if gradient is None:
            probes = x[None, :] + budget.fd_step * np.eye(x.size)
            vals = objective(probes)
            n_evals += x.size
            grad = (vals - fx) / budget.fd_step
            grad[~np.isfinite(grad)] = 0.0
        else:
            grad = gradient(x)
            n_evals += 1
        grad = grad - grad.mean()  # tangent to the mass constraint
        norm = float(np.linalg.norm(grad))
        if norm < 1e-14:
            break
        moved = False
        while step > 1e-12:
            cand = project(x + step * grad / norm)
            fc = float(objective(cand[None, :])[0])
            n_evals += 1
            if np.isfinite(fc) and fc > fx + 1e-15:
                x, fx = cand, fc
                step *= 1.3
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        if fx > best_val:
            best_val, best_x = fx, x.copy()
    return best_val, best_x, n_evals


def multistart_maximize(objective, starts, project, budget: SearchBudget,
                        gradient=None):
    """Projected ascent from each start; returns (best value, best point, evals).

    ``objective`` maps a batch (rows) to values, with -inf marking excluded
    candidates; ``gradient``, when given, replaces the forward-difference
    estimate (used where a single evaluation is expensive but its gradient
    is analytically available).  Starts run as independent work items
    (INEQ_LAB_THREADS caps the workers); the reduction over starts is in
    start order, so results do not depend on scheduling.
    """
    starts = list(starts)
    workers = min(worker_count(), max(len(starts), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda s: _ascend(objective, s, project, budget, gradient),
                starts))
    else:
        results = [_ascend(objective, s, project, budget, gradient)
                   for s in starts]
    best_val, best_x = -np.inf, None
    n_evals = 0
    for val, x, evals in results:
        n_evals += evals
        if x is not None and val > best_val:
            best_val, best_x = val, x
    return best_val, best_x, n_evals
