"""Finite metric spaces, probability measures, entropies, discrete slopes.

The ground space is a labelled symmetric distance matrix.  Probability
measures and potentials are plain weight/value vectors over the points.
Products are handled as shaped arrays (one axis per factor) rather than
materialized tuple lists.

The one-sided slope moduli used here are discrete surrogates: the
continuum definition is a limsup as y -> x, which vanishes at isolated
points and hence everywhere on a finite space.  The global variant takes
the extremal difference quotient over all other points; the neighbor
variant restricts to a supplied adjacency (the natural choice on grid
discretizations of intervals and circles, where it converges to the
continuum modulus).  Results built on slopes are labelled as surrogate
quantities by the calling layers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FiniteMetricSpace",
    "ProbMeasure",
    "ProductSpace",
    "two_point_space",
    "path_space",
    "cycle_space",
    "grid1d_space",
    "space_from_dict",
    "measure_from_dict",
    "load_space_file",
    "relative_entropy",
    "exp_entropy",
    "slope",
    "slope_vector",
    "grid_adjacency",
    "product",
]


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labelled finite metric space given by its distance matrix."""

    labels: tuple
    dist: np.ndarray = field(repr=False)
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        d = np.asarray(self.dist, dtype=float)
        object.__setattr__(self, "dist", d)
        if self.coords is not None:
            object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if len(self.labels) != d.shape[0]:
            raise ValueError("label count must match matrix size")

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def validate(self, tol: float = 1e-9) -> list[str]:
        """List of violated metric axioms (empty means valid)."""
        d = self.dist
        problems = []
        if np.any(np.abs(np.diag(d)) > tol):
            problems.append("nonzero diagonal")
        if np.any(np.abs(d - d.T) > tol):
            problems.append("asymmetric")
        off = d[~np.eye(self.size, dtype=bool)]
        if off.size and np.min(off) <= 0.0:
            problems.append("non-positive off-diagonal distance (duplicate points)")
        if np.any(d < 0):
            problems.append("negative distance")
        # d(i,k) <= min_j d(i,j) + d(j,k), checked in chunks to bound memory
        for i0 in range(0, self.size, 64):
            block = d[i0:i0 + 64, :, None] + d[None, :, :]
            if np.any(block.min(axis=1) < d[i0:i0 + 64] - tol):
                problems.append("triangle inequality violated")
                break
        return problems

    def min_distance(self) -> float:
        off = self.dist[~np.eye(self.size, dtype=bool)]
        return float(off.min()) if off.size else 0.0


@dataclass(frozen=True)
class ProbMeasure:
    """Probability weights over the points of a space."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum():.15g}, not 1")

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0.0)

    def is_dirac(self) -> bool:
        return int(np.count_nonzero(self.weights)) == 1

    @staticmethod
    def uniform(n: int) -> "ProbMeasure":
        return ProbMeasure(np.full(n, 1.0 / n))

    @staticmethod
    def dirac(n: int, i: int) -> "ProbMeasure":
        w = np.zeros(n)
        w[i] = 1.0
        return ProbMeasure(w)

    @staticmethod
    def normalized(raw) -> "ProbMeasure":
        w = np.asarray(raw, dtype=float)
        s = w.sum()
        if not (s > 0 and np.all(np.isfinite(w))):
            raise ValueError("cannot normalize: non-positive or non-finite mass")
        return ProbMeasure(w / s)


# ---------------------------------------------------------------------------
# constructors


def two_point_space(d: float, labels=("a", "b")) -> FiniteMetricSpace:
    if d <= 0:
        raise ValueError("distance must be positive")
    return FiniteMetricSpace(labels, np.array([[0.0, d], [d, 0.0]]))


def path_space(count: int, spacing: float = 1.0, start: float = 0.0) -> FiniteMetricSpace:
    """Points on a line, consecutive spacing ``spacing``; line metric."""
    xs = start + spacing * np.arange(count, dtype=float)
    d = np.abs(xs[:, None] - xs[None, :])
    return FiniteMetricSpace(tuple(f"p{i}" for i in range(count)), d, coords=xs)


def grid1d_space(count: int, spacing: float, start: float = 0.0) -> FiniteMetricSpace:
    """Uniform 1-d grid; same metric as a path, named for config files."""
    return path_space(count, spacing, start)


def cycle_space(count: int, spacing: float = 1.0) -> FiniteMetricSpace:
    """Points on a circle with arc-length (hop-count) metric."""
    idx = np.arange(count)
    hops = np.abs(idx[:, None] - idx[None, :])
    hops = np.minimum(hops, count - hops)
    return FiniteMetricSpace(tuple(f"c{i}" for i in range(count)),
                             spacing * hops.astype(float),
                             coords=idx.astype(float) * spacing)


def grid_adjacency(count: int, wrap: bool = False) -> list[np.ndarray]:
    """Nearest-neighbor adjacency of a path (or cycle when ``wrap``)."""
    out = []
    for i in range(count):
        nbrs = [j for j in (i - 1, i + 1) if 0 <= j < count]
        if wrap:
            nbrs = [(i - 1) % count, (i + 1) % count]
        out.append(np.array(sorted(set(nbrs)), dtype=int))
    return out


_GENERATORS = {"path": path_space, "cycle": cycle_space, "grid1d": grid1d_space}


def space_from_dict(spec: dict) -> FiniteMetricSpace:
    """Build a space from a config mapping.

    Either explicit ``labels`` + ``dist`` or a ``generator`` entry
    {kind: path|cycle|grid1d, count, spacing[, start]}.
    """
    if "generator" in spec:
        g = dict(spec["generator"])
        kind = g.pop("kind")
        if kind not in _GENERATORS:
            raise ValueError(f"unknown generator kind {kind!r}")
        return _GENERATORS[kind](**g)
    if "dist" in spec:
        dist = np.asarray(spec["dist"], dtype=float)
        labels = spec.get("labels") or [str(i) for i in range(dist.shape[0])]
        coords = spec.get("coords")
        space = FiniteMetricSpace(labels, dist,
                                  coords=None if coords is None else np.asarray(coords))
        problems = space.validate()
        if problems:
            raise ValueError(f"invalid space: {', '.join(problems)}")
        return space
    raise ValueError("space spec needs 'dist' or 'generator'")


def measure_from_dict(spec: dict, space: FiniteMetricSpace) -> ProbMeasure:
    """Build a measure from explicit weights or a density expression.

    Explicit weights must already sum to 1 (tolerance 1e-12); a ``density``
    expression in the grid coordinate x is evaluated with numpy semantics
    and normalized on load.
    """
    if "weights" in spec:
        return ProbMeasure(np.asarray(spec["weights"], dtype=float))
    if "density" in spec:
        if space.coords is None:
            raise ValueError("density expressions need a space with coordinates")
        ns = {"x": space.coords, "np": np, "exp": np.exp, "abs": np.abs,
              "cos": np.cos, "sin": np.sin, "sqrt": np.sqrt, "pi": np.pi}
        raw = eval(spec["density"], {"__builtins__": {}}, ns)  # config-supplied formula
        return ProbMeasure.normalized(np.broadcast_to(raw, (space.size,)).astype(float))
    if spec.get("uniform"):
        return ProbMeasure.uniform(space.size)
    raise ValueError("measure spec needs 'weights', 'density' or 'uniform'")


def load_space_file(path) -> tuple[FiniteMetricSpace, ProbMeasure | None]:
    """Read a JSON document holding a space spec and optionally a measure."""
    with open(path) as fh:
        doc = json.load(fh)
    space = space_from_dict(doc)
    mu = measure_from_dict(doc["measure"], space) if "measure" in doc else None
    return space, mu


# ---------------------------------------------------------------------------
# entropies


def relative_entropy(nu: ProbMeasure, mu: ProbMeasure) -> float:
    """KL divergence sum nu log(nu/mu); +oo off absolute continuity."""
    n, m = nu.weights, mu.weights
    if n.shape != m.shape:
        raise ValueError("measures live on different spaces")
    mask = n > 0.0
    if np.any(m[mask] == 0.0):
        return math.inf
    return float(np.sum(n[mask] * np.log(n[mask] / m[mask])))


def exp_entropy(mu, f) -> float:
    """Ent(e^f) = int e^f (f - log int e^f dmu) dmu, shift-stabilized.

    ``mu`` may be a ProbMeasure or a weight array of the same shape as
    ``f`` (used for product measures).  Homogeneity Ent(e^{f+c}) =
    e^c Ent(e^f) is applied with c = max f so the exponentials stay tame.
    """
    w = mu.weights if isinstance(mu, ProbMeasure) else np.asarray(mu, dtype=float)
    f = np.asarray(f, dtype=float)
    if w.shape != f.shape:
        raise ValueError("weights and potential have different shapes")
    m = float(f.max())
    g = f - m
    eg = np.exp(g)
    z = float(np.sum(w * eg))
    ent_shifted = float(np.sum(w * eg * g)) - z * math.log(z)
    return math.exp(m) * ent_shifted


# ---------------------------------------------------------------------------
# slopes


def _rectify(diff: np.ndarray, sign: str) -> np.ndarray:
    if sign == "+":
        return np.maximum(diff, 0.0)
    if sign == "-":
        return np.maximum(-diff, 0.0)
    raise ValueError("sign must be '+' or '-'")


def slope(space: FiniteMetricSpace, f, i: int, sign: str = "+",
          adjacency: list[np.ndarray] | None = None) -> float:
    """One-sided difference-quotient modulus at point i.

    Global mode (no adjacency) maximizes over all other points; neighbor
    mode restricts to adjacency[i].  Empty neighborhoods give 0 (isolated
    point).
    """
    f = np.asarray(f, dtype=float)
    js = np.delete(np.arange(space.size), i) if adjacency is None else adjacency[i]
    if len(js) == 0:
        return 0.0
    diffs = _rectify(f[js] - f[i], sign)
    return float(np.max(diffs / space.dist[i, js]))


def slope_vector(space: FiniteMetricSpace, f, sign: str = "+",
                 adjacency: list[np.ndarray] | None = None) -> np.ndarray:
    """Slope modulus at every point."""
    f = np.asarray(f, dtype=float)
    if adjacency is None:
        d = space.dist.copy()
        np.fill_diagonal(d, np.inf)
        quot = _rectify(f[None, :] - f[:, None], sign) / d
        return quot.max(axis=1)
    return np.array([slope(space, f, i, sign, adjacency) for i in range(space.size)])


# ---------------------------------------------------------------------------
# products


@dataclass(frozen=True)
class ProductSpace:
    """n-fold product of a base space; points are index tuples.

    Functions on the product are ndarrays of shape (size,)*n.  The cost
    between tuples is supplied by the operations that use it (a sum of
    per-coordinate costs), so nothing quadratic in the tuple count is
    stored here.
    """

    base: FiniteMetricSpace
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise ValueError("product order limited to 1..3")
        if self.base.size ** self.n > 10**6:
            raise ValueError("product space too large to enumerate")

    @property
    def shape(self) -> tuple:
        return (self.base.size,) * self.n

    @property
    def size(self) -> int:
        return self.base.size ** self.n

    def product_weights(self, mu: ProbMeasure) -> np.ndarray:
        """Tensor-power weights of mu, shaped (size,)*n."""
        w = mu.weights
        out = w
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, w)
        return out

    def tuples(self):
        """Iterate index tuples in C order."""
        return np.ndindex(self.shape)

    def coordinate_distance(self, axis_points: np.ndarray, j: int) -> np.ndarray:
        """Distances from every base point to base point j (projection helper)."""
        return self.base.dist[axis_points, j]


def product(space: FiniteMetricSpace, n: int) -> ProductSpace:
    return ProductSpace(space, n)
