import math

import numpy as np
import pytest
from scipy.special import ndtr

from berwald import geometry as geo
from berwald import measures as meas
from conftest import random_polytope, seeded


def test_lebesgue_triangle(triangle, leb2):
    assert meas.measure_of_body(leb2, triangle).value == pytest.approx(0.5)


def test_gaussian_halfplane(gauss2):
    box = geo.body_from_vertices([[0, -8], [8, -8], [8, 8], [0, 8]])
    val = meas.measure_of_body(gauss2, box, rel_tol=1e-8)
    assert val.value == pytest.approx(0.5, abs=1e-6)


def test_radial_power_square(square):
    # oracle: closed form of the angular integral, 2 log(1 + sqrt 2)
    rp = meas.radial_power(2, 1.0)
    val = meas.measure_of_body(rp, square)
    assert val.value == pytest.approx(2.0 * math.log(1.0 + math.sqrt(2.0)),
                                      rel=1e-7)


def test_gaussian_square_value(square, gauss2):
    # product structure: (Phi(1) - Phi(0))^2
    oracle = (ndtr(1.0) - ndtr(0.0)) ** 2
    val = meas.measure_of_body(gauss2, square, rel_tol=1e-9)
    assert val.value == pytest.approx(oracle, rel=1e-8)


def test_measure_homogeneity():
    rng = seeded("homog")
    for alpha in (1.0, 2.0):
        mu = meas.radial_power(2, alpha)
        K = random_polytope(2, rng).translate([3.0, 1.0])   # away from pole
        base = meas.measure_of_body(mu, K).value
        for _ in range(3):
            t = float(rng.uniform(0.5, 2.0))
            val = meas.measure_of_body(mu, K.scale(t)).value
            assert val == pytest.approx(t ** alpha * base, rel=1e-6)


def test_boundary_measure_lebesgue(square, triangle, leb2):
    assert meas.boundary_measure(leb2, square) == pytest.approx(4.0, abs=1e-12)
    assert meas.boundary_measure(leb2, triangle) == pytest.approx(
        2.0 + math.sqrt(2.0), rel=1e-12)


def test_boundary_measure_matches_facet_sums():
    rng = seeded("facets")
    K = random_polytope(3, rng)
    leb = meas.lebesgue(3)
    # independent facet areas from the V-rep via cross products
    total = 0.0
    for pv, _, _ in K.facet_pieces():
        e1, e2 = pv[1] - pv[0], pv[2] - pv[0]
        total += 0.5 * np.linalg.norm(np.cross(e1, e2))
    assert meas.boundary_measure(leb, K) == pytest.approx(total, rel=1e-9)


def test_boundary_measure_gaussian_square(square, gauss2):
    # oracle: four 1-D edge integrals through the normal CDF
    edge0 = (ndtr(1.0) - ndtr(0.0)) / math.sqrt(2.0 * math.pi)
    oracle = 2.0 * (1.0 + math.exp(-0.5)) * edge0
    val = meas.boundary_measure(gauss2, square)
    assert val == pytest.approx(oracle, rel=1e-9)


def test_gaussian_cdf_roundtrip():
    u = np.linspace(1e-8, 1 - 1e-8, 501)
    back = meas.gaussian_cdf(meas.gaussian_cdf_inv(u))
    assert np.max(np.abs(back - u)) < 1e-11


def test_descriptor_examples():
    half = meas.descriptor_catalog("power", s=0.5)
    assert half.transform(0.25) == pytest.approx(0.5)
    ehr = meas.descriptor_catalog("ehrhard")
    assert ehr.transform(0.5) == pytest.approx(0.0, abs=1e-12)
    lg = meas.descriptor_catalog("log")
    assert lg.transform(math.e) == pytest.approx(1.0)


def test_descriptor_inverse_roundtrip():
    grid = np.linspace(0.05, 0.95, 19)
    for d in (meas.descriptor_catalog("power", s=0.5),
              meas.descriptor_catalog("power", s=-1 / 3),
              meas.descriptor_catalog("log"),
              meas.descriptor_catalog("ehrhard")):
        back = np.array([d.inverse(d.transform(x)) for x in grid])
        assert np.max(np.abs(back - grid)) < 1e-10
        vals = np.array([d.transform(x) for x in grid])
        diffs = np.diff(vals)
        if d.branch == "R":
            assert np.all(diffs < 0)
        else:
            assert np.all(diffs > 0)


def test_descriptor_derivative_consistency():
    h = 1e-6
    for d in (meas.descriptor_catalog("power", s=0.5),
              meas.descriptor_catalog("log"),
              meas.descriptor_catalog("ehrhard")):
        for x in (0.2, 0.5, 0.8):
            fd = (d.transform(x + h) - d.transform(x - h)) / (2 * h)
            assert d.derivative(x) == pytest.approx(fd, rel=1e-5)


def test_descriptor_validity_metadata():
    gh = meas.descriptor_catalog("gaussian-half-power", n=2)
    assert gh.validity == "contains_origin"
    assert gh.s == pytest.approx(0.25)
    sp = meas.descriptor_catalog("symmetric-power", n=3)
    assert sp.validity == "symmetric"
    assert sp.s == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        meas.descriptor_catalog("unknown-kind")


def test_descriptor_measure_compatibility():
    leb, g2 = meas.lebesgue(2), meas.gaussian(2)
    cau = meas.cauchy(2, 2.5)
    half = meas.descriptor_catalog("power", s=0.5)
    lg = meas.descriptor_catalog("log")
    ehr = meas.descriptor_catalog("ehrhard")
    neg = meas.descriptor_catalog("power", s=-2.0)
    assert half.compatible_measure(leb)
    assert not half.compatible_measure(g2)
    assert lg.compatible_measure(g2) and lg.compatible_measure(leb)
    assert ehr.compatible_measure(g2) and not ehr.compatible_measure(leb)
    assert neg.compatible_measure(cau)       # s = -1/(beta-n) = -2
    assert not meas.descriptor_catalog("power", s=-1.0).compatible_measure(
        meas.cauchy(2, 2.2))                 # best is -5, weaker than -1


def test_measure_catalog_dispatch():
    mu = meas.measure_catalog("exponential", 2, c=2.0)
    assert mu.kind == "exponential"
    assert mu.in_Mn
    with pytest.raises(ValueError):
        meas.measure_catalog("nope", 2)


def test_monte_carlo_dimension_fallback():
    K = geo.cube(5)
    mu = meas.gaussian(5)
    val = meas.measure_of_body(mu, K, mc_samples=2 ** 16)
    oracle = (ndtr(1.0) - ndtr(0.0)) ** 5
    assert val.value == pytest.approx(oracle, abs=4 * val.error)
    assert val.error > 0
