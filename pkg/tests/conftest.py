import numpy as np
import pytest

from ineqlab.spaces import FiniteMetricSpace, ProbMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_metric_space(rng, n, scale=2.0, min_sep=0.25):
    """Random points in the plane; Euclidean distances are always a metric."""
    while True:
        pts = rng.uniform(0.0, scale, (n, 2))
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        space = FiniteMetricSpace([str(i) for i in range(n)], d)
        if space.min_distance() >= min_sep and not space.validate():
            return space


def random_measure(rng, n, concentration=4.0):
    return ProbMeasure(rng.dirichlet(np.full(n, concentration)))


@pytest.fixture
def space_factory():
    return random_metric_space


@pytest.fixture
def measure_factory():
    return random_measure
