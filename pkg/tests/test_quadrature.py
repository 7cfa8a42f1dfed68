import math

import numpy as np
import pytest

from berwald import quadrature as quad

GAMMA_EULER = 0.5772156649015329


def exp_profile(B=40.0):
    return quad.Profile1D.from_function(lambda t: math.exp(-t), B,
                                        eval_noise=1e-16)


def test_simplex_rule_degree_exactness():
    # Dirichlet integrals over the unit simplex in 2-4 dimensions
    from math import factorial
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        pts, w7, w5 = quad.simplex_rule(n, 3)
        for _ in range(10):
            a = rng.integers(0, 4, size=n)
            while a.sum() > 7:
                a = rng.integers(0, 4, size=n)
            vals = np.prod(pts[:, :n] ** a, axis=1)
            exact = np.prod([factorial(int(ai)) for ai in a]) / factorial(n + int(a.sum()))
            assert float(w7 @ vals) == pytest.approx(exact, rel=1e-12, abs=1e-15)


def test_integrate_simplices_smooth():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    val, err = quad.integrate_simplices(
        lambda X: np.exp(-(X ** 2).sum(axis=1)), [verts], rel_tol=1e-10)
    from scipy.integrate import dblquad
    oracle, _ = dblquad(lambda y, x: math.exp(-(x * x + y * y)),
                        0, 1, 0, lambda x: 1 - x, epsabs=1e-12)
    assert val == pytest.approx(oracle, rel=1e-9)


def test_mellin_gamma_positive():
    prof = exp_profile()
    assert quad.mellin(prof, 0.5).value == pytest.approx(math.sqrt(math.pi),
                                                         rel=1e-9)
    assert quad.mellin(prof, 1.5).value == pytest.approx(
        0.5 * math.sqrt(math.pi), rel=1e-9)


def test_mellin_gamma_continuation():
    prof = exp_profile()
    assert quad.mellin(prof, -0.5).value == pytest.approx(
        -2.0 * math.sqrt(math.pi), rel=1e-9)


def test_mellin_beta_closed_form():
    prof = quad.Profile1D.from_function(lambda t: max(0.0, 1.0 - t), 1.0,
                                        eval_noise=1e-16)
    assert quad.mellin(prof, 1.0).value == pytest.approx(0.5, rel=1e-10)


def test_mellin_domain_errors():
    prof = exp_profile()
    with pytest.raises(quad.QuadratureError):
        quad.mellin(prof, -1.0)
    with pytest.raises(quad.QuadratureError):
        quad.mellin(prof, 0.0)


def test_mellin_scaling_law():
    # Mel(psi(./alpha))(p) = alpha^p Mel(psi)(p)
    rng = np.random.default_rng(11)
    base = exp_profile()
    for _ in range(5):
        alpha = float(rng.uniform(0.5, 2.0))
        p = float(rng.uniform(-0.9, 2.5))
        if abs(p) < 1e-3:
            continue
        scaled = quad.Profile1D.from_function(
            lambda t: math.exp(-t / alpha), 40.0 * alpha, eval_noise=1e-16)
        lhs = quad.mellin(scaled, p).value
        rhs = alpha ** p * quad.mellin(base, p).value
        assert lhs == pytest.approx(rhs, rel=1e-8)


def _trapezoid_oracle(fn, B, p, panels=1_000_000):
    """Brute-force 1e6-panel trapezoid for both Mellin branches.

    The endpoint singularity of the weight is removed first by the power
    substitutions u = t^p (p in (0,1)) and u = t^(p+1) on the subtracted
    integrand (p in (-1,0)); the substituted integrands are smooth, so the
    composite trapezoid rule converges at its regular rate.
    """
    if p >= 1.0:
        t = np.linspace(0.0, B, panels + 1)
        vals = np.array([x ** (p - 1.0) * fn(x) for x in t])
        return float(np.trapezoid(vals, t))
    if p > 0.0:
        u = np.linspace(0.0, B ** p, panels + 1)
        vals = np.array([fn(x) for x in u ** (1.0 / p)])
        return float(np.trapezoid(vals, u) / p)
    a0 = fn(0.0)
    q = p + 1.0
    u = np.linspace(0.0, B ** q, panels + 1)[1:]
    t = u ** (1.0 / q)
    vals = np.array([(fn(x) - a0) / x for x in t])
    head = np.concatenate([[vals[0]], vals])   # integrand -> slope at 0
    uu = np.concatenate([[0.0], u])
    return float(np.trapezoid(head, uu) / q + B ** p / p * a0)


def test_mellin_vs_trapezoid_oracle():
    fn = lambda t: math.exp(-t) * (1.0 + 0.5 * math.sin(t))
    prof = quad.Profile1D.from_function(fn, 35.0, eval_noise=1e-16,
                                        monotone=False)
    for p in (0.5, -0.5):
        oracle = _trapezoid_oracle(fn, 35.0, p)
        assert quad.mellin(prof, p).value == pytest.approx(oracle, rel=1e-6)


def test_mellin_log_limit_values():
    lin = quad.Profile1D.from_function(lambda t: max(0.0, 1.0 - t), 1.0,
                                       eval_noise=1e-16)
    assert quad.mellin_log_limit(lin) == pytest.approx(math.exp(-1.0),
                                                       rel=1e-10)
    ind = quad.Profile1D.from_samples([0.0, 0.5, 1.0], [1.0, 1.0, 1.0])
    assert quad.mellin_log_limit(ind) == pytest.approx(1.0, rel=1e-10)
    assert quad.mellin_log_limit(exp_profile()) == pytest.approx(
        math.exp(-GAMMA_EULER), rel=1e-9)


def test_mellin_log_limit_requires_monotone():
    bad = quad.Profile1D.from_samples([0.0, 0.5, 1.0], [1.0, 2.0, 0.0])
    with pytest.raises(quad.QuadratureError):
        quad.mellin_log_limit(bad)


def test_mellin_continuous_at_zero():
    # normalized form ((p/A) Mel)^{1/p} approaches the log-limit
    lin = quad.Profile1D.from_function(lambda t: max(0.0, 1.0 - t), 1.0,
                                       eval_noise=1e-16)
    target = quad.mellin_log_limit(lin)
    for p in (1e-4, -1e-4):
        val = (p / 1.0 * quad.mellin(lin, p).value) ** (1.0 / p)
        assert val == pytest.approx(target, rel=1e-3)


def test_fractional_limit_examples():
    rep = quad.fractional_limit_check(exp_profile())
    assert rep.extrapolated == pytest.approx(1.0, abs=2e-4)
    lin = quad.Profile1D.from_function(lambda t: max(0.0, 1.0 - t), 1.0,
                                       eval_noise=1e-16)
    rep2 = quad.fractional_limit_check(lin)
    assert rep2.extrapolated == pytest.approx(1.0, abs=2e-4)
    par = quad.Profile1D.from_function(lambda t: 2.0 * max(0.0, 1.0 - t * t),
                                       1.0, eval_noise=1e-16)
    rep3 = quad.fractional_limit_check(par)
    assert rep3.extrapolated == pytest.approx(2.0, abs=4e-4)


def test_directions_uniform_2d():
    ds = quad.directions(2, 4)
    expect = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], float)
    assert np.allclose(ds.vectors, expect, atol=1e-12)


def test_directions_fibonacci_coverage():
    ds = quad.directions(3, 256)
    assert np.allclose(np.linalg.norm(ds.vectors, axis=1), 1.0, atol=1e-12)
    dots = ds.vectors @ ds.vectors.T
    np.fill_diagonal(dots, -1.0)
    gap = float(np.arccos(np.clip(dots.max(axis=1), -1, 1)).max())
    assert gap < 0.25


def test_directions_seeded_deterministic():
    a = quad.directions(4, 512, seed=42)
    b = quad.directions(4, 512, seed=42)
    assert np.array_equal(a.vectors, b.vectors)
    c = quad.directions(4, 512, seed=43)
    assert not np.array_equal(a.vectors, c.vectors)


def test_directions_symmetric_option():
    for n in (2, 3, 4):
        ds = quad.directions(n, 16, symmetric=True)
        v = ds.vectors
        matched = [np.min(np.linalg.norm(v + u, axis=1)) for u in v]
        assert max(matched) < 1e-9


def test_sphere_quadrature_total_mass():
    for n, area in ((2, 2 * math.pi), (3, 4 * math.pi)):
        pts, w = quad.sphere_quadrature(n, 64)
        assert w.sum() == pytest.approx(area, rel=1e-9)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_rng_stream_splittable():
    a = quad.rng_stream(1, "task", 0).random(4)
    b = quad.rng_stream(1, "task", 0).random(4)
    c = quad.rng_stream(1, "task", 1).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
