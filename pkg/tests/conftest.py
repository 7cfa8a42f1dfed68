import numpy as np
import pytest

from berwald import geometry as geo
from berwald import means
from berwald import measures as meas
from berwald.quadrature import rng_stream


@pytest.fixture
def square():
    return geo.cube(2)


@pytest.fixture
def triangle():
    return geo.simplex(2)


@pytest.fixture
def centered_square():
    return geo.cube(2, centered=True)


@pytest.fixture
def leb2():
    return meas.lebesgue(2)


@pytest.fixture
def gauss2():
    return meas.gaussian(2)


def random_polytope(n, rng, lo=None, hi=None):
    m = int(rng.integers(6, 9)) if n == 2 else int(rng.integers(10, 15))
    return geo.ConvexBody(rng.standard_normal((m, n)))


def random_minaffine(K, rng, k=3, floor=0.3):
    """Concave min of k affine pieces, strictly positive on K."""
    pieces = []
    for _ in range(k):
        a = rng.standard_normal(K.n)
        c = -float(np.min(K.vertices @ a)) + float(rng.uniform(floor, 1.0))
        pieces.append((a, c))
    return means.ConcaveFunction(K, pieces=pieces)


def seeded(*key):
    return rng_stream(20240601, *key)
