"""Measure catalog, polytope measure evaluation, and concavity descriptors.

Densities are vectorized callables on (m, n) point arrays.  Measure values
over bodies come from a simplicial fan decomposition with embedded
Grundmann-Moller rules refined adaptively; alpha-homogeneous densities with
an origin singularity instead integrate exactly in the radial variable and
numerically over the sphere.  Concavity descriptors package the invertible
monotone transforms (power, log, Gaussian-quantile) together with the class
of convex sets on which the corresponding measure concavity is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

from .geometry import ConvexBody, GeometryError
from .quadrature import integrate_simplices, rng_stream, sphere_quadrature

MEASURE_REL_TOL = 1e-8
MC_DIM_THRESHOLD = 5


def gaussian_cdf(x):
    """Standard normal CDF (erfc-backed, double-precision minimax)."""
    return ndtr(x)


def gaussian_cdf_inv(u):
    """Inverse standard normal CDF."""
    return ndtri(u)


class GaussianCDF:
    """Stateless CDF pair used by the Gaussian-quantile descriptor."""
    cdf = staticmethod(gaussian_cdf)
    inv = staticmethod(gaussian_cdf_inv)


@dataclass
class MeasureValue:
    value: float
    error: float
    flagged: bool = False

    def __float__(self):
        return self.value


@dataclass
class MeasureSpec:
    """Density evaluator plus the metadata the certification layer consumes.

    best_s is the strongest power-concavity exponent valid on all convex
    subsets (1/n for Lebesgue, 0 meaning log-concavity, negative for
    heavy-tailed catalog entries, None when no concavity is claimed).
    """

    kind: str
    n: int
    density: object
    params: tuple = ()
    is_lebesgue: bool = False
    homogeneity: float | None = None
    singular_at_origin: bool = False
    even: bool = True
    best_s: float | None = None
    is_gaussian: bool = False
    in_Mn: bool = False

    def cache_key(self):
        return (self.kind, self.n, self.params)

    def __repr__(self):
        extra = f", params={self.params}" if self.params else ""
        return f"MeasureSpec({self.kind}, n={self.n}{extra})"


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def lebesgue(n: int) -> MeasureSpec:
    return MeasureSpec(kind="lebesgue", n=n,
                       density=lambda x: np.ones(np.atleast_2d(x).shape[0]),
                       is_lebesgue=True, homogeneity=float(n),
                       best_s=1.0 / n, in_Mn=True)


def gaussian(n: int, sigma: float = 1.0) -> MeasureSpec:
    norm = (2.0 * np.pi * sigma * sigma) ** (-n / 2.0)

    def density(x):
        x = np.atleast_2d(x)
        return norm * np.exp(-0.5 * (x * x).sum(axis=1) / (sigma * sigma))

    return MeasureSpec(kind="gaussian", n=n, density=density,
                       params=(float(sigma),), best_s=0.0,
                       is_gaussian=(sigma == 1.0), in_Mn=True)


def radial_power(n: int, alpha: float) -> MeasureSpec:
    """Density |x|^(alpha-n); the measure is alpha-homogeneous.

    Used where homogeneity, not concavity, is required.
    """
    if alpha <= 0:
        raise ValueError("homogeneity degree must be positive")
    expo = alpha - n

    def density(x):
        x = np.atleast_2d(x)
        r = np.sqrt((x * x).sum(axis=1))
        with np.errstate(divide="ignore"):
            return np.where(r > 0, r ** expo, np.inf if expo < 0 else 0.0)

    return MeasureSpec(kind="radial_power", n=n, density=density,
                       params=(float(alpha),), homogeneity=float(alpha),
                       singular_at_origin=(expo < 0), best_s=None)


def cauchy(n: int, beta: float) -> MeasureSpec:
    """Density (1+|x|^2)^(-beta); member of the rotation-invariant class and,
    for beta > n, s-concave with s = -1/(beta - n) on all convex sets."""
    def density(x):
        x = np.atleast_2d(x)
        return (1.0 + (x * x).sum(axis=1)) ** (-beta)

    best = -1.0 / (beta - n) if beta > n else None
    return MeasureSpec(kind="cauchy", n=n, density=density,
                       params=(float(beta),), best_s=best, in_Mn=True)


def exponential(n: int, c: float = 1.0) -> MeasureSpec:
    def density(x):
        x = np.atleast_2d(x)
        return np.exp(-c * np.sqrt((x * x).sum(axis=1)))

    return MeasureSpec(kind="exponential", n=n, density=density,
                       params=(float(c),), best_s=0.0, in_Mn=True)


_CATALOG = {"lebesgue": lebesgue, "gaussian": gaussian,
            "radial_power": radial_power, "cauchy": cauchy,
            "exponential": exponential}


def measure_catalog(kind: str, n: int, **params) -> MeasureSpec:
    if kind not in _CATALOG:
        raise ValueError(f"unknown measure kind '{kind}'")
    return _CATALOG[kind](n, **params)


def transformed_measure(mu: MeasureSpec, T) -> MeasureSpec:
    """Measure with density phi(T x); the pushforward companion of x -> T x."""
    T = np.asarray(T, float)
    base = mu.density
    return MeasureSpec(kind=mu.kind + "@T", n=mu.n,
                       density=lambda x: base(np.atleast_2d(x) @ T.T),
                       params=mu.params + (T.round(12).tobytes(),),
                       is_lebesgue=mu.is_lebesgue, best_s=None,
                       even=False)


# ---------------------------------------------------------------------------
# Measure evaluation
# ---------------------------------------------------------------------------

def _fan_simplices(K: ConvexBody):
    apex = K.centroid
    return [np.vstack([apex, pv]) for pv, _, _ in K.facet_pieces()]


def integrate_over_body(fn, K: ConvexBody, rel_tol: float = MEASURE_REL_TOL,
                        max_splits: int = 4000) -> MeasureValue:
    """Adaptive integral of a vectorized integrand over a polytope."""
    val, err = integrate_simplices(fn, _fan_simplices(K), rel_tol=rel_tol,
                                   max_splits=max_splits)
    flagged = err > max(10.0 * rel_tol * abs(val), 1e-12)
    return MeasureValue(value=float(val), error=float(err), flagged=flagged)


def _homogeneous_measure(mu: MeasureSpec, K: ConvexBody) -> MeasureValue:
    """Radial-fan evaluation for alpha-homogeneous densities.

    Exact in the radial variable; the angular integral is adaptive (n = 2,
    with facet-change breakpoints at vertex angles) or a dense product grid
    (n = 3).
    """
    alpha = mu.homogeneity
    A, b = K.A, K.b

    if K.n == 2:
        def arc(theta_angle):
            th = np.array([np.cos(theta_angle), np.sin(theta_angle)])
            ext = K.ray_extent(th)
            if ext is None:
                return 0.0
            r0, r1 = ext
            return float(mu.density(th[None, :])[0]) * (r1 ** alpha - r0 ** alpha)

        angles = np.sort(np.mod(np.arctan2(K.vertices[:, 1], K.vertices[:, 0]),
                                2.0 * np.pi))
        val, err = quad(arc, 0.0, 2.0 * np.pi, points=list(angles),
                        limit=400, epsabs=1e-14, epsrel=1e-10)
        return MeasureValue(value=val / alpha, error=err / alpha,
                            flagged=err > 1e-6 * max(abs(val), 1e-12))

    pts, w = sphere_quadrature(K.n, resolution=400 if K.n == 3 else 0)
    denom = pts @ A.T
    with np.errstate(divide="ignore"):
        hi = np.where(denom > 1e-14, b[None, :] / denom, np.inf).min(axis=1)
        lo = np.maximum(np.where(denom < -1e-14, b[None, :] / denom,
                                 -np.inf).max(axis=1), 0.0)
    span = np.maximum(hi, 0.0) ** alpha - np.minimum(lo, np.maximum(hi, 0.0)) ** alpha
    span[hi <= lo] = 0.0
    phi_sphere = mu.density(pts)
    val = float((w * phi_sphere * span).sum() / alpha)
    return MeasureValue(value=val, error=abs(val) * 1e-5, flagged=False)


def _mc_measure(mu: MeasureSpec, K: ConvexBody, samples: int) -> MeasureValue:
    rng = rng_stream(0, "mc_measure", mu.cache_key(), K.cache_key())
    lo = K.vertices.min(axis=0)
    hi = K.vertices.max(axis=0)
    box_vol = float(np.prod(hi - lo))
    x = lo + (hi - lo) * rng.random((samples, K.n))
    inside = np.all(x @ K.A.T <= K.b + 1e-12, axis=1)
    vals = np.where(inside, mu.density(x), 0.0)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(samples))
    return MeasureValue(value=box_vol * mean, error=box_vol * se, flagged=False)


_TOTAL_CACHE: dict = {}


def measure_of_body(mu: MeasureSpec, K: ConvexBody | None,
                    rel_tol: float = MEASURE_REL_TOL,
                    mc_samples: int = 2 ** 20,
                    cache: bool = False) -> MeasureValue:
    """mu(K) with an error estimate; empty bodies have measure zero.

    cache=True memoizes by (measure, body) content, for the totals mu(K)
    and nu(DK) that profile and chain evaluation request repeatedly.
    """
    if K is None:
        return MeasureValue(0.0, 0.0)
    if mu.is_lebesgue:
        return MeasureValue(K.volume, 0.0)
    if cache:
        key = (mu.cache_key(), K.cache_key(), rel_tol)
        hit = _TOTAL_CACHE.get(key)
        if hit is not None:
            return hit
    if mu.singular_at_origin and mu.homogeneity is not None:
        out = _homogeneous_measure(mu, K)
    elif K.n >= MC_DIM_THRESHOLD:
        out = _mc_measure(mu, K, mc_samples)
    else:
        out = integrate_over_body(mu.density, K, rel_tol=rel_tol)
    if cache:
        _TOTAL_CACHE[key] = out
    return out


def boundary_measure(mu: MeasureSpec, K: ConvexBody,
                     rel_tol: float = 1e-9) -> float:
    """Integral of the density over the boundary of K (facet quadrature)."""
    pieces = [pv for pv, _, _ in K.facet_pieces()]
    if mu.is_lebesgue:
        return float(sum(m for _, _, m in K.facet_pieces()))
    val, _ = integrate_simplices(mu.density, pieces, rel_tol=rel_tol)
    return float(val)


def facet_weights(mu: MeasureSpec, K: ConvexBody, rel_tol: float = 1e-10):
    """Per-facet-piece boundary integrals of the density.

    Returns (normals (m, n), weights (m,)) over simplicial facet pieces; the
    raw material of weighted projection bodies.
    """
    normals = []
    weights = []
    for pv, nrm, meas in K.facet_pieces():
        if mu.is_lebesgue:
            w = meas
        else:
            w, _ = integrate_simplices(mu.density, [pv], rel_tol=rel_tol)
        normals.append(nrm)
        weights.append(float(w))
    return np.asarray(normals), np.asarray(weights)


# ---------------------------------------------------------------------------
# Concavity descriptors
# ---------------------------------------------------------------------------

@dataclass
class ConcavityDescriptor:
    """Invertible monotone transform witnessing a measure concavity.

    branch F: increasing with F(0) = 0 (power s > 0);
    branch Q: increasing onto the real line (log, Gaussian quantile);
    branch R: decreasing and positive (power s < 0).
    validity records the class of convex sets the concavity holds on.
    """

    name: str
    branch: str
    transform: object
    inverse: object
    derivative: object
    validity: str = "all"
    s: float | None = None
    zero_anchored: bool = False

    def compatible_measure(self, mu: MeasureSpec) -> bool:
        if self.name == "ehrhard":
            return mu.is_gaussian
        if self.validity == "contains_origin":
            return mu.is_gaussian
        if self.validity == "symmetric":
            return mu.in_Mn
        if self.s is not None:
            return mu.best_s is not None and mu.best_s >= self.s
        if self.name == "log":
            return mu.best_s is not None and mu.best_s >= 0.0
        return False

    def __repr__(self):
        return f"ConcavityDescriptor({self.name}, branch={self.branch}, validity={self.validity})"


def _power_descriptor(s: float, validity: str, name: str) -> ConcavityDescriptor:
    if s == 0:
        raise ValueError("use the log descriptor for s = 0")
    branch = "F" if s > 0 else "R"
    return ConcavityDescriptor(
        name=name, branch=branch,
        transform=lambda x, s=s: x ** s,
        inverse=lambda y, s=s: y ** (1.0 / s),
        derivative=lambda x, s=s: s * x ** (s - 1.0),
        validity=validity, s=float(s), zero_anchored=(s > 0))


def descriptor_catalog(name: str, **params) -> ConcavityDescriptor:
    """Named concavity descriptors.

    power(s), log, ehrhard, gaussian-half-power(n) = power(1/(2n)) on bodies
    containing the origin, symmetric-power(n) = power(1/n) on symmetric
    bodies.
    """
    if name == "power":
        return _power_descriptor(float(params["s"]), "all", "power")
    if name == "log":
        return ConcavityDescriptor(
            name="log", branch="Q",
            transform=np.log, inverse=np.exp,
            derivative=lambda x: 1.0 / x, validity="all", s=0.0)
    if name == "ehrhard":
        def qderiv(x):
            z = ndtri(x)
            return np.sqrt(2.0 * np.pi) * np.exp(0.5 * z * z)
        return ConcavityDescriptor(
            name="ehrhard", branch="Q",
            transform=ndtri, inverse=ndtr, derivative=qderiv,
            validity="all", s=None)
    if name == "gaussian-half-power":
        n = int(params["n"])
        return _power_descriptor(1.0 / (2 * n), "contains_origin",
                                 "gaussian-half-power")
    if name == "symmetric-power":
        n = int(params["n"])
        return _power_descriptor(1.0 / n, "symmetric", "symmetric-power")
    raise ValueError(f"unknown descriptor '{name}'")
