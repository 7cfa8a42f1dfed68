"""Weighted covariograms of convex bodies and their directional profiles.

The covariogram of K under a measure mu sends x to mu(K intersect (K + x));
the polarized variant measures (K + x/2) intersect (K - x/2).  Directional
profiles r -> g(r theta) live on [0, rho_DK(theta)] and feed the Mellin
machinery of the radial mean bodies; their one-sided derivative at 0 equals
minus the support function of the weighted projection body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (ConvexBody, GeometryError, as_direction, difference_body,
                       intersect_shift, intersect_shift_volume)
from .measures import MeasureSpec, measure_of_body
from .quadrature import PROFILE_NODES, Profile1D, rng_stream

_PROFILE_CACHE: dict = {}


def covariogram_at(K: ConvexBody, mu: MeasureSpec, x,
                   rel_tol: float = 1e-8) -> float:
    """g(x) = mu(K intersect (K + x)); zero for empty intersections."""
    x = np.asarray(x, float)
    if mu.is_lebesgue:
        return intersect_shift_volume(K, x)
    body = intersect_shift(K, x)
    if body is None:
        return 0.0
    return measure_of_body(mu, body, rel_tol=rel_tol).value


def polarized_covariogram_at(K: ConvexBody, mu: MeasureSpec, x,
                             rel_tol: float = 1e-8) -> float:
    """mu((K + x/2) intersect (K - x/2)) = mu((K intersect (K - x)) + x/2)."""
    x = np.asarray(x, float)
    body = intersect_shift(K, -x)
    if body is None:
        return 0.0
    return measure_of_body(mu, body.translate(0.5 * x), rel_tol=rel_tol).value


@dataclass
class CovariogramProfile:
    """Directional covariogram profile on [0, rho_DK(theta)]."""

    K: ConvexBody
    mu: MeasureSpec
    theta: np.ndarray
    rho_dk: float
    total: float              # mu(K) = profile value at r = 0
    data: Profile1D
    polarized: bool = False

    def eval(self, r: float) -> float:
        return self.data.eval(r)


def profile(K: ConvexBody, mu: MeasureSpec, theta, nodes: int = PROFILE_NODES,
            polarized: bool = False, rel_tol: float = 1e-8,
            cache: bool = True) -> CovariogramProfile:
    """Covariogram profile along theta; cached per (body, measure, direction).

    The profile keeps an exact evaluator (each call is one shifted
    intersection plus one measure evaluation); the node grid supports
    plotting, CSV export and monotonicity checks.
    """
    theta = as_direction(theta)
    key = (K.cache_key(), mu.cache_key(), theta.round(12).tobytes(),
           nodes, polarized, rel_tol)
    if cache and key in _PROFILE_CACHE:
        return _PROFILE_CACHE[key]
    dk = difference_body(K)
    rho = dk.radial_origin(theta)
    point = covariogram_at if not polarized else polarized_covariogram_at

    def evaluator(r: float) -> float:
        if r >= rho:
            return 0.0
        return point(K, mu, r * theta, rel_tol=rel_tol)

    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    noise = 1e-15 if mu.is_lebesgue else rel_tol * total * 10.0
    data = Profile1D.from_function(evaluator, rho, nodes=nodes, monotone=True,
                                   eval_noise=noise)
    data.psi0 = total
    out = CovariogramProfile(K=K, mu=mu, theta=theta, rho_dk=rho, total=total,
                             data=data, polarized=polarized)
    if cache:
        _PROFILE_CACHE[key] = out
    return out


def clear_profile_cache():
    _PROFILE_CACHE.clear()


def derivative_at_zero(prof: CovariogramProfile) -> float:
    """Richardson-extrapolated one-sided derivative of the profile at r = 0.

    Contract: equals -h(theta) of the weighted projection body for densities
    with the boundary in their Lebesgue set.
    """
    h = prof.rho_dk / 64.0
    g0 = prof.total
    d = [(prof.eval(h / 2 ** k) - g0) / (h / 2 ** k) for k in range(3)]
    return (8.0 * d[2] - 6.0 * d[1] + d[0]) / 3.0


def _sample_in_scaled_dk(dk: ConvexBody, rng, shrink: float = 0.93):
    lo = dk.vertices.min(axis=0) * shrink
    hi = dk.vertices.max(axis=0) * shrink
    for _ in range(10000):
        x = lo + (hi - lo) * rng.random(dk.n)
        if np.all(dk.A @ x <= shrink * dk.b):
            return x
    raise GeometryError("rejection sampling failed")


@dataclass
class ConcavityReport:
    trials: int
    worst_margin: float
    worst_rel_margin: float
    worst_triple: tuple
    descriptor: str
    polarized: bool

    @property
    def passed(self) -> bool:
        return self.worst_rel_margin >= -1e-6


def concavity_check(K: ConvexBody, mu: MeasureSpec, descriptor, trials: int = 500,
                    seed: int = 0, rel_tol: float = 1e-8) -> ConcavityReport:
    """Sampled transform-concavity check of the covariogram.

    Draws (x, y, lambda) with x, y in a slightly shrunken difference body and
    verifies the concavity (convexity, for decreasing transforms) of the
    transformed covariogram.  Symmetric-class descriptors require a symmetric
    body and are checked on the polarized covariogram, whose intersections
    stay in the symmetric class.
    """
    polarized = False
    if descriptor.validity == "symmetric":
        if not K.is_symmetric():
            raise GeometryError("symmetric-class descriptor needs a symmetric body")
        polarized = True
    elif descriptor.validity == "contains_origin":
        raise GeometryError(
            "origin-class concavity does not transfer to covariogram "
            "intersections; use a symmetric or unrestricted descriptor")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(
            f"descriptor {descriptor.name} is not valid for measure {mu.kind}")

    point = polarized_covariogram_at if polarized else covariogram_at
    dk = difference_body(K)
    rng = rng_stream(seed, "concavity", K.cache_key(), mu.cache_key())
    T = descriptor.transform
    decreasing = descriptor.branch == "R"

    worst = math.inf
    worst_rel = math.inf
    worst_triple = None
    for _ in range(trials):
        x = _sample_in_scaled_dk(dk, rng)
        y = _sample_in_scaled_dk(dk, rng)
        lam = rng.uniform(0.02, 0.98)
        gx = point(K, mu, x, rel_tol=rel_tol)
        gy = point(K, mu, y, rel_tol=rel_tol)
        gz = point(K, mu, lam * x + (1.0 - lam) * y, rel_tol=rel_tol)
        if min(gx, gy, gz) <= 0.0:
            continue
        tx, ty, tz = float(T(gx)), float(T(gy)), float(T(gz))
        if decreasing:
            margin = lam * tx + (1.0 - lam) * ty - tz
        else:
            margin = tz - lam * tx - (1.0 - lam) * ty
        scale = max(abs(tx), abs(ty), abs(tz), 1e-30)
        if margin / scale < worst_rel:
            worst_rel = margin / scale
            worst = margin
            worst_triple = (x.copy(), y.copy(), lam)
    return ConcavityReport(trials=trials, worst_margin=float(worst),
                           worst_rel_margin=float(worst_rel),
                           worst_triple=worst_triple,
                           descriptor=descriptor.name, polarized=polarized)


def ray_affinity_check(K: ConvexBody, mu: MeasureSpec, descriptor, dirs,
                       nodes: int = 33, rel_tol: float = 1e-9) -> float:
    """Max deviation of the transformed covariogram from its affine
    interpolant along rays through the origin (zero-anchored descriptors).

    Zero exactly when the transformed covariogram is a multiple of the
    roof function of DK, the equality profile of the inclusion chains.
    """
    if not descriptor.zero_anchored:
        raise GeometryError("ray affinity needs a zero-anchored descriptor")
    dk = difference_body(K)
    worst = 0.0
    for theta in dirs:
        theta = as_direction(theta)
        rho = dk.radial_origin(theta)
        rr = np.linspace(0.0, rho, nodes)
        vals = np.array([descriptor.transform(
            max(covariogram_at(K, mu, r * theta, rel_tol=rel_tol), 0.0))
            for r in rr])
        affine = vals[0] + (vals[-1] - vals[0]) * rr / rho
        worst = max(worst, float(np.max(np.abs(vals - affine)) /
                                 max(abs(vals[0]), 1e-30)))
    return worst
