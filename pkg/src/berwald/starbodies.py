"""Radial mean bodies, polarized mean bodies, spectral mean bodies, weighted
projection bodies and their polars, translated averages, and shape limits.

Star and support bodies are held as direction-sampled value tables; set
inclusions downstream are certified directionwise on those samples.
Projection bodies additionally carry their facet data (normals and boundary
density weights), so support values are evaluable at arbitrary directions,
which dense angular integration relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariogram import covariogram_at, derivative_at_zero, profile
from .geometry import ConvexBody, GeometryError, as_direction, difference_body
from .measures import MeasureSpec, facet_weights, integrate_over_body, measure_of_body, transformed_measure
from .quadrature import DirectionSet, mellin, mellin_log_limit, sphere_quadrature

PROFILE_NODES_DENSE = 17   # light grids for per-direction transform work


@dataclass
class StarBodySamples:
    """Direction-sampled radial function of a star body."""
    directions: DirectionSet
    values: np.ndarray
    errors: np.ndarray
    family: str
    params: dict
    flags: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass
class SupportBodySamples:
    """Direction-sampled support function of a weighted projection body.

    Carries the facet normals, boundary weights and the shift vector, so
    support(theta) is exact at any direction: h = sum of negative parts of
    <theta, n_i> times the facet weights.
    """
    directions: DirectionSet
    values: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    shift: np.ndarray
    family: str

    def support(self, theta) -> float:
        dots = self.normals @ np.asarray(theta, float)
        return float(np.maximum(-dots, 0.0) @ self.weights)

    def support_many(self, thetas: np.ndarray) -> np.ndarray:
        dots = np.atleast_2d(thetas) @ self.normals.T
        return np.maximum(-dots, 0.0) @ self.weights

    def support_symmetric(self, theta) -> float:
        dots = self.normals @ np.asarray(theta, float)
        return float(0.5 * np.abs(dots) @ self.weights)


def _mean_radial(prof, p: float, total: float):
    """((p/total) Mel(profile))^(1/p) with error propagation and flags."""
    if p == 0.0:
        return mellin_log_limit(prof.data), 0.0, False
    mel = mellin(prof.data, p)
    arg = (p / total) * mel.value
    if not np.isfinite(arg) or arg <= 0.0:
        return math.inf, math.inf, True
    val = arg ** (1.0 / p)
    rel = mel.error / max(abs(mel.value), 1e-300)
    return float(val), float(abs(val) * rel / abs(p)), mel.flagged


def radial_mean_body(K: ConvexBody, mu: MeasureSpec, p: float,
                     dirs: DirectionSet, nodes: int = PROFILE_NODES_DENSE,
                     rel_tol: float = 1e-8) -> StarBodySamples:
    """p-th radial mean body: directionwise Mellin transform of the
    covariogram profile, difference-body radials at p = infinity."""
    dk = difference_body(K)
    vals, errs, flags = [], [], []
    for theta in dirs:
        if np.isinf(p):
            vals.append(dk.radial_origin(theta))
            errs.append(0.0)
            flags.append(False)
            continue
        prof = profile(K, mu, theta, nodes=nodes, rel_tol=rel_tol)
        v, e, fl = _mean_radial(prof, p, prof.total)
        vals.append(v)
        errs.append(e)
        flags.append(fl)
    return StarBodySamples(directions=dirs, values=np.asarray(vals),
                           errors=np.asarray(errs), family="radial_mean",
                           params={"p": p, "measure": mu.kind},
                           flags=np.asarray(flags))


def polarized_mean_body(K: ConvexBody, mu: MeasureSpec, p: float,
                        dirs: DirectionSet, nodes: int = PROFILE_NODES_DENSE,
                        rel_tol: float = 1e-8) -> StarBodySamples:
    """Polarized variant: same pipeline on the polarized covariogram."""
    dk = difference_body(K)
    vals, errs, flags = [], [], []
    for theta in dirs:
        if np.isinf(p):
            vals.append(dk.radial_origin(theta))
            errs.append(0.0)
            flags.append(False)
            continue
        prof = profile(K, mu, theta, nodes=nodes, polarized=True,
                       rel_tol=rel_tol)
        v, e, fl = _mean_radial(prof, p, prof.total)
        vals.append(v)
        errs.append(e)
        flags.append(fl)
    return StarBodySamples(directions=dirs, values=np.asarray(vals),
                           errors=np.asarray(errs), family="polarized_mean",
                           params={"p": p, "measure": mu.kind},
                           flags=np.asarray(flags))


def weighted_projection_body(K: ConvexBody, mu: MeasureSpec,
                             dirs: DirectionSet,
                             rel_tol: float = 1e-10) -> SupportBodySamples:
    """Weighted projection body from facet quadrature of the density.

    support(theta) = sum over facets of the negative part of <theta, n>
    times the facet density weight; the symmetric version halves the
    absolute parts, and the shift vector is half the weighted normal sum.
    """
    normals, weights = facet_weights(mu, K, rel_tol=rel_tol)
    shift = 0.5 * normals.T @ weights
    dots = dirs.vectors @ normals.T
    vals = np.maximum(-dots, 0.0) @ weights
    return SupportBodySamples(directions=dirs, values=vals, normals=normals,
                              weights=weights, shift=shift,
                              family=f"projection[{mu.kind}]")


def polar_radial(h: SupportBodySamples, theta) -> float:
    """Radial function of the polar body: reciprocal support value."""
    val = h.support(theta)
    if val <= 0.0:
        raise GeometryError("support value must be positive to take the polar")
    return 1.0 / val


def spectral_mean_body(K: ConvexBody, p: float,
                       dirs: DirectionSet) -> StarBodySamples:
    """Spectral mean bodies (Lebesgue only): (p+1)^(1/p) times the radial
    mean body for p > -1, volume-scaled polar projection body at p = -1."""
    from .measures import lebesgue
    if p < -1:
        raise ValueError("spectral mean bodies need p >= -1")
    if p == -1.0:
        proj = weighted_projection_body(K, lebesgue(K.n), dirs)
        vals = K.volume / proj.support_many(dirs.vectors)
        return StarBodySamples(directions=dirs, values=vals,
                               errors=np.zeros(len(vals)),
                               family="spectral_mean", params={"p": p},
                               flags=np.zeros(len(vals), bool))
    base = radial_mean_body(K, lebesgue(K.n), p, dirs)
    factor = math.e if p == 0.0 else (p + 1.0) ** (1.0 / p)
    return StarBodySamples(directions=dirs, values=factor * base.values,
                           errors=factor * base.errors,
                           family="spectral_mean", params={"p": p},
                           flags=base.flags)


@dataclass
class LimitShapeReport:
    p_values: tuple
    values: tuple
    extrapolated: float
    target: float
    deviation: float


def limit_shape_check(K: ConvexBody, mu: MeasureSpec, theta,
                      p_values=(-0.9, -0.99, -0.999),
                      rel_tol: float = 1e-8) -> LimitShapeReport:
    """Shape limit of the radial mean bodies as p -> -1.

    (p+1)^(1/p) rho_{R_p}(theta) must approach mu(K) / h(theta) of the
    weighted projection body; reports the sampled values, a linear
    extrapolation in (p+1), and its relative deviation from the target.
    """
    theta = as_direction(theta)
    prof = profile(K, mu, theta, rel_tol=rel_tol)
    vals = []
    for p in p_values:
        v, _, _ = _mean_radial(prof, p, prof.total)
        vals.append((p + 1.0) ** (1.0 / p) * v)
    slope = -derivative_at_zero(prof)
    target = prof.total / slope
    e = [p + 1.0 for p in p_values]
    v_ext = vals[-1] - e[-1] * (vals[-1] - vals[-2]) / (e[-1] - e[-2])
    return LimitShapeReport(p_values=tuple(p_values), values=tuple(vals),
                            extrapolated=float(v_ext), target=float(target),
                            deviation=float(abs(vals[-1] - target) / target))


def translated_average(nu: MeasureSpec, mu: MeasureSpec, K: ConvexBody,
                       rel_tol: float = 1e-7,
                       cov_rel_tol: float = 1e-8) -> float:
    """nu-translated average: integral of the covariogram against nu over the
    difference body, normalized by mu(K).

    Densities singular at the origin are handled by subtracting the peak:
    g(0) nu(DK) (radial route, exact in r) plus the integral of
    (g - g(0)) times the density, whose integrand is bounded.
    """
    dk = difference_body(K)
    total = measure_of_body(mu, K, rel_tol=cov_rel_tol, cache=True).value

    def g_many(X):
        return np.array([covariogram_at(K, mu, x, rel_tol=cov_rel_tol)
                         for x in np.atleast_2d(X)])

    if nu.singular_at_origin:
        base = total * measure_of_body(nu, dk, cache=True).value

        def integrand(X):
            return (g_many(X) - total) * nu.density(X)

        corr = integrate_over_body(integrand, dk, rel_tol=rel_tol,
                                   max_splits=600).value
        return float((base + corr) / total)

    if nu.is_lebesgue:
        integrand = g_many
    else:
        def integrand(X):
            return g_many(X) * nu.density(X)

    val = integrate_over_body(integrand, dk, rel_tol=rel_tol,
                              max_splits=600).value
    return float(val / total)


@dataclass
class HomogeneityReport:
    star_side: float
    average_side: float
    rel_gap: float


def homogeneity_check(nu: MeasureSpec, mu: MeasureSpec, K: ConvexBody,
                      resolution: int = 0,
                      rel_tol: float = 1e-8) -> HomogeneityReport:
    """nu(R_{alpha,mu} K) against the nu-translated average, alpha the
    homogeneity degree of nu; equal in exact arithmetic."""
    alpha = nu.homogeneity
    if alpha is None:
        raise GeometryError("nu must declare a homogeneity degree")
    pts, w = sphere_quadrature(K.n, resolution or (512 if K.n == 2 else 200))
    phi = nu.density(pts)
    vals = np.empty(len(pts))
    for i, theta in enumerate(pts):
        prof = profile(K, mu, theta, nodes=9, rel_tol=rel_tol)
        mel = mellin(prof.data, alpha)
        vals[i] = (alpha / prof.total) * mel.value   # = rho^alpha
    star = float((w * phi * vals).sum() / alpha)
    avg = translated_average(nu, mu, K, cov_rel_tol=rel_tol)
    return HomogeneityReport(star_side=star, average_side=avg,
                             rel_gap=float(abs(star - avg) / abs(avg)))


def polar_projection_measure(nu: MeasureSpec, proj: SupportBodySamples,
                             n: int, resolution: int = 0) -> float:
    """nu of the polar projection body by the homogeneous star formula
    (1/alpha) integral of density(theta) support(theta)^(-alpha)."""
    alpha = nu.homogeneity
    if alpha is None:
        raise GeometryError("nu must declare a homogeneity degree")
    pts, w = sphere_quadrature(n, resolution or (4096 if n == 2 else 1600))
    total = 0.0
    for lo in range(0, len(pts), 262144):   # chunked: grids reach 5M points
        sl = slice(lo, lo + 262144)
        h = proj.support_many(pts[sl])
        total += float((w[sl] * nu.density(pts[sl]) * h ** (-alpha)).sum())
    return total / alpha


@dataclass
class EquivarianceReport:
    sup_rel_gap: float
    gaps: np.ndarray


def linear_equivariance_check(K: ConvexBody, mu: MeasureSpec, T, p: float,
                              dirs: DirectionSet,
                              rel_tol: float = 1e-8) -> EquivarianceReport:
    """Radial mean bodies commute with volume-preserving linear maps:
    R_p of TK under mu equals T applied to R_p of K under the pulled-back
    measure (density composed with T)."""
    T = np.asarray(T, float)
    if abs(np.linalg.det(T) - 1.0) > 1e-9:
        raise GeometryError("equivariance statement requires det T = 1")
    TK = K.linear_image(T)
    muT = transformed_measure(mu, T)
    Tinv = np.linalg.inv(T)
    lhs = radial_mean_body(TK, mu, p, dirs, rel_tol=rel_tol)
    gaps = np.empty(len(dirs))
    for i, theta in enumerate(dirs):
        u = Tinv @ theta
        scale = np.linalg.norm(u)
        prof = profile(K, muT, u / scale, nodes=PROFILE_NODES_DENSE,
                       rel_tol=rel_tol)
        v, _, _ = _mean_radial(prof, p, prof.total)
        rhs = v / scale
        gaps[i] = abs(lhs.values[i] - rhs) / abs(rhs)
    return EquivarianceReport(sup_rel_gap=float(gaps.max()), gaps=gaps)
