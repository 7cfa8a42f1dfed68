import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from berwald import geometry as geo
from berwald import means
from berwald import measures as meas
from berwald.quadrature import mellin
from conftest import random_minaffine, random_polytope, seeded

HALF = meas.descriptor_catalog("power", s=0.5)
LOG = meas.descriptor_catalog("log")
NEG = meas.descriptor_catalog("power", s=-1 / 3)
EHR = meas.descriptor_catalog("ehrhard")


# -- extremal profiles and constants ----------------------------------------

def test_extremal_profile_values():
    assert means.extremal_profile_value(HALF, 1.0, 0.5) == pytest.approx(0.25)
    assert means.extremal_profile_value(LOG, 1.0, 1.0) == pytest.approx(
        math.exp(-1.0))
    assert means.extremal_profile_value(NEG, 1.0, 1.0) == pytest.approx(0.125)
    assert means.extremal_profile_value(HALF, 1.0, 1.5) == 0.0
    assert means.extremal_profile_value(HALF, 0.7, 0.0) == pytest.approx(0.7)


def test_constant_closed_forms():
    assert means.berwald_constant(1.0, HALF, 1.0) == pytest.approx(3.0,
                                                                   rel=1e-10)
    assert means.berwald_constant(2.0, LOG, 1.0) == pytest.approx(
        2.0 ** -0.5, rel=1e-10)
    assert means.berwald_constant(1.0, NEG, 1.0) == pytest.approx(2.0,
                                                                  rel=1e-9)
    assert means.berwald_constant(0.0, HALF, 1.0) == pytest.approx(
        math.exp(1.5), rel=1e-9)


def test_constant_coherence_with_binomial():
    # C(p, power(1/n), Vol K) = binom(n+p, p)^(1/p) for any total mass
    for n in (2, 3):
        d = meas.descriptor_catalog("power", s=1.0 / n)
        for total in (0.5, 1.0, 2.5):
            for p in (-0.5, 0.5, 1.0, 2.0, 5.0):
                want = means.binom_real(n + p, p) ** (1.0 / p)
                got = means.berwald_constant(p, d, total)
                assert got == pytest.approx(want, rel=1e-10)


def test_constant_divergence_flags():
    assert means.berwald_constant(3.0, NEG, 1.0) == math.inf
    assert means.berwald_constant(2.9999, NEG, 1.0) < math.inf


def test_mellin_identity_power_family():
    # 1 / Mel(extremal)(p) = p C(p, s) for the closed-form family
    for s in (1.0, 0.5, 0.0, -1 / 3):
        d = (meas.descriptor_catalog("log") if s == 0.0
             else meas.descriptor_catalog("power", s=s))
        prof = means.extremal_profile(d, 1.0)
        for p in (-0.5, -0.25, 0.5, 1.0, 1.5, 2.0, 2.5):
            want = p * means.power_constant_closed(p, s)
            got = 1.0 / mellin(prof, p).value
            assert got == pytest.approx(want, rel=1e-8)


def test_lebesgue_constant():
    assert means.lebesgue_constant(2, 1.0) == pytest.approx(3.0, rel=1e-12)
    assert means.lebesgue_constant(2, 2.0) == pytest.approx(math.sqrt(6.0),
                                                            rel=1e-12)
    assert means.lebesgue_constant(2, 0.0) == pytest.approx(math.exp(1.5),
                                                            rel=1e-12)
    # digamma limit: numeric p -> 0 agreement
    assert means.lebesgue_constant(2, 1e-4) == pytest.approx(
        means.lebesgue_constant(2, 0.0), rel=1e-3)
    assert means.lebesgue_constant(2, -1e-4) == pytest.approx(
        means.lebesgue_constant(2, 0.0), rel=1e-3)


def test_binom_real():
    assert means.binom_real(4, 2) == pytest.approx(6.0)
    assert means.binom_real(3, 1) == pytest.approx(3.0)
    assert means.binom_real(2 * 3, 3) == pytest.approx(20.0)


# -- concave functions and means --------------------------------------------

def test_roof_means_match_binomials(triangle, leb2):
    roof = means.ConcaveFunction.from_roof(triangle, 1.0, [0, 0])
    assert means.power_mean(roof, leb2, 1.0) == pytest.approx(1 / 3, rel=1e-9)
    assert means.power_mean(roof, leb2, 2.0) == pytest.approx(
        6.0 ** -0.5, rel=1e-9)


def test_constant_function_mean(square, leb2):
    f = means.ConcaveFunction(square, pieces=[(np.zeros(2), 0.7)])
    for p in (-0.5, 0.0, 0.5, 2.0):
        assert means.power_mean(f, leb2, p) == pytest.approx(0.7, rel=1e-9)


def test_mean_against_direct_quadrature_oracle(leb2, gauss2):
    rng = seeded("mean_oracle")
    K = random_polytope(2, rng)
    f = random_minaffine(K, rng)
    for mu in (leb2, gauss2):
        for p in (1.0, 2.5):
            level = means.power_mean(f, mu, p, route="exact")
            direct = means.power_mean_direct(f, mu, p)
            assert level == pytest.approx(direct, rel=1e-6)
            # the fast sampled-profile route stays within its grid bias
            fast = means.power_mean(f, mu, p, route="grid")
            assert fast == pytest.approx(direct, rel=1e-3)


def test_min_affine_requires_nonnegative(square):
    with pytest.raises(geo.GeometryError):
        means.ConcaveFunction(square, pieces=[(np.array([1.0, 0.0]), -2.0)])


def test_fmax_and_level_sets(square):
    f = means.ConcaveFunction(square, pieces=[(np.array([-1.0, 0.0]), 1.0),
                                              (np.array([1.0, 0.0]), 0.5)])
    # max of min(1 - x, 0.5 + x) on the square is at x = 0.25
    assert f.fmax == pytest.approx(0.75, rel=1e-9)
    body = f.level_set(0.5)
    lo, hi = body.vertices.min(axis=0), body.vertices.max(axis=0)
    assert lo[0] == pytest.approx(0.0, abs=1e-9)
    assert hi[0] == pytest.approx(0.5, abs=1e-9)
    assert f.level_set(0.75 + 1e-9) is None


# -- curves ------------------------------------------------------------------

def test_roof_curve_constant(triangle, leb2):
    roof = means.ConcaveFunction.from_roof(triangle, 1.0, [0, 0])
    curve = means.berwald_curve(roof, leb2, HALF, [-0.5, 0.5, 1, 2, 5])
    assert np.max(np.abs(curve.values - 1.0)) < 1e-8
    assert curve.is_nonincreasing()


def test_random_curve_decreasing(leb2):
    rng = seeded("curve_dec")
    K = random_polytope(2, rng)
    f = random_minaffine(K, rng)
    curve = means.berwald_curve(f, leb2, HALF, [-0.5, 0.5, 1, 2, 5])
    assert np.all(np.diff(curve.values) < 0)


def test_gaussian_log_curve_decreasing(gauss2):
    rng = seeded("curve_gauss")
    K = random_polytope(2, rng)
    f = random_minaffine(K, rng)
    curve = means.berwald_curve(f, gauss2, LOG, [0.5, 1, 2, 4])
    assert np.all(np.diff(curve.values) < 0)


def test_curve_scaling_covariance(triangle, leb2):
    rng = seeded("curve_scale")
    f = random_minaffine(triangle, rng)
    grid = [-0.5, 0.5, 1, 2]
    base = means.berwald_curve(f, leb2, HALF, grid)
    scaled = means.berwald_curve(f.scaled(2.5), leb2, HALF, grid)
    assert np.allclose(scaled.values, 2.5 * base.values, rtol=1e-9)


def test_curve_compatibility_guards(square, centered_square, gauss2, leb2):
    rng = seeded("compat")
    f = random_minaffine(square, rng)
    with pytest.raises(geo.GeometryError):
        means.berwald_curve(f, gauss2, HALF, [1.0])       # wrong measure
    origin_class = meas.descriptor_catalog("gaussian-half-power", n=2)
    off_origin = means.ConcaveFunction(
        square, pieces=[(np.array([1.0, 1.0]), 0.1)])   # max at (1,1)
    with pytest.raises(geo.GeometryError):
        means.berwald_curve(off_origin, gauss2, origin_class, [1.0])
    roof = means.ConcaveFunction.from_roof(square, 1.0, [0, 0])
    curve = means.berwald_curve(roof, gauss2, origin_class, [0.5, 1, 2])
    assert curve.is_nonincreasing(rel_tol=1e-8)
    sym = meas.descriptor_catalog("symmetric-power", n=2)
    with pytest.raises(geo.GeometryError):
        means.berwald_curve(f, gauss2, sym, [1.0])        # K not symmetric
    roof_sym = means.ConcaveFunction.from_roof(centered_square, 1.0, [0, 0])
    curve2 = means.berwald_curve(roof_sym, gauss2, sym, [0.5, 1, 2])
    assert curve2.is_nonincreasing(rel_tol=1e-8)


# -- equality certificates ----------------------------------------------------

def test_roof_certificates(triangle, square, leb2):
    for K in (triangle, square):
        roof = means.ConcaveFunction.from_roof(K, 1.0, [0, 0])
        cert = means.equality_certificate(roof, leb2, HALF)
        assert cert.certified
        assert cert.sup_rel_deviation < 1e-9


def test_truncated_cone_not_certified(triangle, leb2):
    cone = means.ConcaveFunction(
        triangle, pieces=[(np.zeros(2), 1.0), (np.array([-2.0, -2.0]), 2.0)])
    cert = means.equality_certificate(cone, leb2, HALF)
    assert not cert.certified
    assert cert.sup_rel_deviation > 0.05


def test_constant_not_certified(triangle, leb2):
    f = means.ConcaveFunction(triangle, pieces=[(np.zeros(2), 1.0)])
    cert = means.equality_certificate(f, leb2, HALF)
    assert not cert.certified


def test_certificate_needs_zero_anchor(triangle, gauss2):
    roof = means.ConcaveFunction.from_roof(triangle, 1.0, [0, 0])
    with pytest.raises(geo.GeometryError):
        means.equality_certificate(roof, gauss2, LOG)


# -- half-space moments, norm bounds, perturbation ----------------------------

def test_halfspace_moment_gaussian(gauss2):
    rep = means.halfspace_moment_ratio(gauss2, [1, 0], 1.0, 2.0, LOG)
    # oracles: one-dimensional positive Gaussian moments
    lhs_oracle = math.sqrt(0.5)
    rhs_oracle = 2.0 / math.sqrt(2.0 * math.pi)
    assert rep.lhs == pytest.approx(lhs_oracle, abs=1e-6)
    assert rep.rhs == pytest.approx(rhs_oracle, abs=1e-6)
    assert rep.margin > 0
    assert rep.halfspace_mass == pytest.approx(0.5, abs=1e-8)
    assert rep.tail_bound < 1e-12


def test_halfspace_moment_p_equals_q(gauss2):
    rep = means.halfspace_moment_ratio(gauss2, [0, 1], 2.0, 2.0, LOG)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-10)


def test_halfspace_moment_ehrhard_tighter(gauss2):
    log_rep = means.halfspace_moment_ratio(gauss2, [1, 0], 1.0, 2.0, LOG)
    ehr_rep = means.halfspace_moment_ratio(gauss2, [1, 0], 1.0, 2.0, EHR)
    assert ehr_rep.lhs <= ehr_rep.rhs
    assert ehr_rep.rhs <= log_rep.rhs + 1e-9   # stronger concavity, tighter


def test_lq_l1_bound_equality_case(triangle, leb2):
    roof = means.ConcaveFunction.from_roof(triangle, 1.0, [0, 0])
    rep = means.lq_l1_bound(roof, leb2, HALF, beta=1.0, q=2.0)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-7)


def test_lq_l1_bound_constant(square, leb2):
    f = means.ConcaveFunction(square, pieces=[(np.zeros(2), 1.0)])
    rep = means.lq_l1_bound(f, leb2, HALF, beta=1.0, q=2.0)
    assert rep.lhs == pytest.approx(1.0, rel=1e-8)
    assert rep.rhs >= rep.lhs - 1e-9


def test_lq_l1_bound_gaussian(gauss2):
    rng = seeded("lq_gauss")
    K = random_polytope(2, rng)
    f = random_minaffine(K, rng)
    rep = means.lq_l1_bound(f, gauss2, LOG, beta=1.0, q=3.0)
    assert rep.margin >= -1e-9


def test_perturbation_check(triangle, leb2):
    roof = means.ConcaveFunction.from_roof(triangle, 1.0, [0, 0])
    rep = means.perturbation_check(triangle, leb2, roof, 1.0, 2.0)
    assert rep.margin == pytest.approx(0.0, abs=1e-8)
    rep_pq = means.perturbation_check(triangle, leb2, roof, 2.0, 2.0)
    assert rep_pq.margin == pytest.approx(0.0, abs=1e-12)
    rng = seeded("perturb")
    psi = random_minaffine(triangle, rng)
    rep_r = means.perturbation_check(triangle, leb2, psi, 1.0, 2.0)
    assert rep_r.margin >= -1e-6
