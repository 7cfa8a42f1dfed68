"""Normalized p-th means of concave functions, the attached constants, and
monotone-curve / equality certification.

For a concave f on K and a measure mu, the normalized curve multiplies the
p-th mean of f by a constant built from the Mellin transform of the
extremal level-set profile of the measure's concavity descriptor; that
product is nonincreasing in p, constant exactly on the extremal family.
Everything runs through the layer-cake route: the level-set measure profile
t -> mu({f >= t}) is the one-dimensional object all transforms consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, gammaln, gamma as gamma_fn

from .geometry import ConvexBody, GeometryError, RoofFunction, as_direction, body_from_halfspaces, cube
from .measures import (ConcavityDescriptor, MeasureSpec, integrate_over_body,
                       measure_of_body)
from .quadrature import MellinResult, Profile1D, mellin, mellin_log_limit

T_NODES = 65


# ---------------------------------------------------------------------------
# Closed-form constants
# ---------------------------------------------------------------------------

def binom_real(a: float, b: float) -> float:
    """Generalized binomial coefficient Gamma(a+1)/(Gamma(b+1)Gamma(a-b+1))."""
    return float(gamma_fn(a + 1.0) / (gamma_fn(b + 1.0) * gamma_fn(a - b + 1.0)))


def power_constant_closed(p: float, s: float) -> float:
    """Closed-form normalizing constant of the s-concave family.

    Returns binom(1/s + p, p) for s > 0, 1/Gamma(p+1) for s = 0, and
    s (p + 1/s) binom(-1/s, p) for s < 0 (valid for p < -1/s).
    """
    if s > 0:
        return binom_real(1.0 / s + p, p)
    if s == 0:
        return float(1.0 / gamma_fn(p + 1.0))
    if p >= -1.0 / s:
        return math.inf
    return float(s * (p + 1.0 / s) * binom_real(-1.0 / s, p))


def lebesgue_constant(n: int, p: float) -> float:
    """c(n, p) = (n B(p+1, n))^(-1/p) = binom(n+p, p)^(1/p), harmonic limit at 0."""
    if p == 0.0:
        return float(np.exp(sum(1.0 / k for k in range(1, n + 1))))
    return float(np.exp(-(np.log(n) + betaln(p + 1.0, n)) / p))


# ---------------------------------------------------------------------------
# Extremal level-set profiles and Mellin constants
# ---------------------------------------------------------------------------

def extremal_profile_value(descriptor: ConcavityDescriptor, A: float,
                           t: float) -> float:
    """The extremal level-set profile of the descriptor at total mass A.

    Branch F: F^{-1}(F(A)(1-t)) on [0,1]; branch Q: Q^{-1}(Q(A)-t);
    branch R: R^{-1}(R(A)(1+t)).  Zero outside the branch support.
    """
    if t < 0:
        return 0.0
    if descriptor.branch == "F":
        if t > 1.0:
            return 0.0
        return float(descriptor.inverse(descriptor.transform(A) * (1.0 - t)))
    if descriptor.branch == "Q":
        return float(descriptor.inverse(descriptor.transform(A) - t))
    return float(descriptor.inverse(descriptor.transform(A) * (1.0 + t)))


def extremal_profile(descriptor: ConcavityDescriptor, A: float) -> Profile1D:
    B = 1.0 if descriptor.branch == "F" else math.inf
    return Profile1D.from_function(
        lambda t: extremal_profile_value(descriptor, A, t), B,
        nodes=65, monotone=True, eval_noise=1e-15, horizon=40.0)


_CONST_CACHE: dict = {}


def berwald_constant(p: float, descriptor: ConcavityDescriptor, total: float,
                     rel_tol: float = 1e-10) -> float:
    """Multiplicative constant applied to the p-th mean in the monotone curve.

    Computed as ((p/total) Mel(extremal profile))^(-1/p), the p -> 0 member
    via the logarithmic limit.  Divergent transforms (past the empirical
    integrability threshold) return +inf.
    """
    key = (descriptor.name, descriptor.s, round(float(total), 14), float(p))
    if key in _CONST_CACHE:
        return _CONST_CACHE[key]
    if descriptor.s is not None and descriptor.s < 0 and p >= -1.0 / descriptor.s:
        return math.inf
    prof = extremal_profile(descriptor, total)
    if p == 0.0:
        val = 1.0 / mellin_log_limit(prof)
    else:
        mel = mellin(prof, p, rel_tol=rel_tol)
        arg = (p / total) * mel.value
        if mel.flagged or not np.isfinite(arg) or arg <= 0.0:
            val = math.inf
        else:
            val = float(arg ** (-1.0 / p))
    _CONST_CACHE[key] = val
    return val


# ---------------------------------------------------------------------------
# Concave functions on polytopes
# ---------------------------------------------------------------------------

class ConcaveFunction:
    """Nonnegative concave function on a body: min of affine pieces or a roof.

    Level sets are H-polytopes (min-affine) or exact homothets (roof), which
    keeps the layer-cake measure profile exact up to the measure quadrature.
    """

    def __init__(self, K: ConvexBody, pieces=None, roof: RoofFunction | None = None):
        if (pieces is None) == (roof is None):
            raise GeometryError("supply either affine pieces or a roof")
        self.K = K
        self.roof = roof
        if roof is not None:
            self.pieces = None
            self.fmax = roof.height
            self.argmax = roof.apex
        else:
            arr = [(np.asarray(a, float), float(c)) for a, c in pieces]
            vals = np.min(np.stack([K.vertices @ a + c for a, c in arr], axis=1),
                          axis=1)
            if vals.min() < -1e-12:
                raise GeometryError("affine pieces must be nonnegative on the body")
            self.pieces = arr
            self.fmax, self.argmax = self._maximize()
        self._profiles: dict = {}

    @classmethod
    def from_roof(cls, K: ConvexBody, height: float = 1.0, apex=None):
        return cls(K, roof=RoofFunction(K, height, apex))

    def _maximize(self):
        from scipy.optimize import linprog
        n = self.K.n
        m = len(self.pieces)
        A_ub = np.zeros((m + len(self.K.b), n + 1))
        b_ub = np.zeros(m + len(self.K.b))
        for i, (a, c) in enumerate(self.pieces):
            A_ub[i, :n] = -a
            A_ub[i, n] = 1.0
            b_ub[i] = c
        A_ub[m:, :n] = self.K.A
        b_ub[m:] = self.K.b
        cost = np.zeros(n + 1)
        cost[n] = -1.0
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub,
                      bounds=[(None, None)] * (n + 1), method="highs")
        if not res.success:
            raise GeometryError("could not maximize concave function")
        return float(res.x[n]), res.x[:n]

    def __call__(self, x) -> float:
        x = np.asarray(x, float)
        if self.roof is not None:
            return self.roof(x)
        if not self.K.contains(x, 1e-9):
            return 0.0
        return max(0.0, min(float(a @ x + c) for a, c in self.pieces))

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.roof is not None:
            Y = X - self.roof.apex
            den = self.roof._den
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(den > 1e-14, (Y @ self.K.A.T) / den, -np.inf)
            gauge = ratios.max(axis=1)
            vals = self.roof.height * np.maximum(0.0, 1.0 - gauge)
        else:
            vals = np.min(np.stack([X @ a + c for a, c in self.pieces], axis=1),
                          axis=1)
            vals = np.maximum(vals, 0.0)
        inside = np.all(X @ self.K.A.T <= self.K.b + 1e-12, axis=1)
        return np.where(inside, vals, 0.0)

    def level_set(self, t: float):
        """The convex body {f >= t} within K, or None when empty/degenerate."""
        if t <= 0:
            return self.K
        if t >= self.fmax:
            return None
        if self.roof is not None:
            return self.roof.level_set(t)
        rows, offs = [], []
        for a, c in self.pieces:
            if np.linalg.norm(a) < 1e-13:
                if c - t < -1e-13:    # constant piece below the level
                    return None
                continue
            rows.append(-a)
            offs.append(c - t)
        if not rows:
            return self.K
        A = np.vstack([self.K.A] + rows)
        b = np.concatenate([self.K.b, offs])
        try:
            return body_from_halfspaces(A, b)
        except GeometryError:
            return None

    def scaled(self, c: float) -> "ConcaveFunction":
        if self.roof is not None:
            return ConcaveFunction(self.K, roof=RoofFunction(
                self.K, self.roof.height * c, self.roof.apex))
        return ConcaveFunction(self.K, pieces=[(a * c, cc * c)
                                               for a, cc in self.pieces])

    def is_even(self, rng=None, samples: int = 32, tol: float = 1e-9) -> bool:
        if rng is None:
            rng = np.random.default_rng(0)
        lo, hi = self.K.vertices.min(axis=0), self.K.vertices.max(axis=0)
        X = lo + (hi - lo) * rng.random((samples, self.K.n))
        return bool(np.allclose(self.eval_many(X), self.eval_many(-X), atol=tol))

    def cache_key(self):
        if self.roof is not None:
            return ("roof", self.K.cache_key(), self.roof.height,
                    self.roof.apex.round(12).tobytes())
        return ("minaff", self.K.cache_key(),
                tuple((a.round(12).tobytes(), round(c, 12))
                      for a, c in self.pieces))


def level_profile(f: ConcaveFunction, mu: MeasureSpec,
                  rel_tol: float = 1e-8, nodes: int = T_NODES) -> Profile1D:
    """Layer-cake profile t -> mu({f >= t}) on [0, max f], cached per measure."""
    key = (mu.cache_key(), rel_tol, nodes)
    if key in f._profiles:
        return f._profiles[key]
    total = measure_of_body(mu, f.K, rel_tol=rel_tol, cache=True).value

    def evaluator(t: float) -> float:
        if t <= 0.0:
            return total
        body = f.level_set(t)
        return measure_of_body(mu, body, rel_tol=rel_tol).value

    noise = 1e-15 if mu.is_lebesgue else rel_tol * total * 10.0
    prof = Profile1D.from_function(evaluator, f.fmax, nodes=nodes,
                                   monotone=True, eval_noise=noise)
    prof.psi0 = total
    f._profiles[key] = prof
    return prof


def power_mean(f: ConcaveFunction, mu: MeasureSpec, p: float,
               rel_tol: float = 1e-8, route: str = "auto") -> float:
    """M_p of f against the normalized measure on its support body.

    Layer-cake route: both Mellin branches of the level-set profile, the
    geometric mean at p = 0.  route "exact" integrates the level-set
    evaluator adaptively (then each quadrature node is one polytope measure);
    "grid" integrates the sampled profile, reusing the node grid across the
    whole p-family; "auto" picks "exact" where level sets are cheap
    homothets and "grid" otherwise.
    """
    prof = level_profile(f, mu, rel_tol=rel_tol)
    if route == "auto":
        route = "exact" if (f.roof is not None and mu.is_lebesgue) else "grid"
    use = prof if route == "exact" else prof.grid_view()
    if p == 0.0:
        return mellin_log_limit(use)
    mel = mellin(use, p)
    arg = (p / prof.psi0) * mel.value
    if arg <= 0 or not np.isfinite(arg):
        return math.inf
    return float(arg ** (1.0 / p))


def power_mean_direct(f: ConcaveFunction, mu: MeasureSpec, p: float,
                      rel_tol: float = 1e-9) -> float:
    """Independent n-dimensional quadrature oracle for the p-th mean (p > 0)."""
    if p <= 0:
        raise ValueError("direct oracle is for p > 0")
    total = measure_of_body(mu, f.K, rel_tol=rel_tol, cache=True).value

    def integrand(X):
        return f.eval_many(X) ** p * mu.density(X)

    val = integrate_over_body(integrand, f.K, rel_tol=rel_tol).value
    return float((val / total) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Monotone curves and equality certificates
# ---------------------------------------------------------------------------

@dataclass
class BerwaldCurve:
    p_grid: np.ndarray
    values: np.ndarray
    constants: np.ndarray
    means: np.ndarray
    flags: np.ndarray

    def is_nonincreasing(self, rel_tol: float = 1e-6) -> bool:
        v = self.values[np.isfinite(self.values)]
        return bool(np.all(np.diff(v) <= rel_tol * np.abs(v[:-1])))


def check_curve_compatibility(f: ConcaveFunction, mu: MeasureSpec,
                              descriptor: ConcavityDescriptor):
    if not descriptor.compatible_measure(mu):
        raise GeometryError(
            f"descriptor {descriptor.name} not valid for measure {mu.kind}")
    if descriptor.validity == "contains_origin":
        if not f.K.contains(np.zeros(f.K.n), 1e-9):
            raise GeometryError("origin-class descriptor needs 0 in the body")
        if np.linalg.norm(f.argmax) > 1e-7:
            raise GeometryError(
                "origin-class descriptor needs the maximum of f at the origin")
    if descriptor.validity == "symmetric":
        if not f.K.is_symmetric():
            raise GeometryError("symmetric-class descriptor needs a symmetric body")
        if not f.is_even():
            raise GeometryError("symmetric-class descriptor needs an even f")


def berwald_curve(f: ConcaveFunction, mu: MeasureSpec,
                  descriptor: ConcavityDescriptor, p_grid,
                  rel_tol: float = 1e-8, route: str = "auto") -> BerwaldCurve:
    """Normalized mean curve over a p-grid; nonincreasing by the main theorem."""
    check_curve_compatibility(f, mu, descriptor)
    p_grid = np.asarray(sorted(p_grid), float)
    total = level_profile(f, mu, rel_tol=rel_tol).psi0
    consts, means, vals, flags = [], [], [], []
    for p in p_grid:
        C = berwald_constant(p, descriptor, total)
        M = power_mean(f, mu, p, rel_tol=rel_tol, route=route)
        consts.append(C)
        means.append(M)
        vals.append(C * M)
        flags.append(not np.isfinite(C * M))
    return BerwaldCurve(p_grid=p_grid, values=np.asarray(vals),
                        constants=np.asarray(consts), means=np.asarray(means),
                        flags=np.asarray(flags))


@dataclass
class EqualityCertificate:
    certified: bool
    sup_rel_deviation: float
    zero_anchored: bool
    t_grid: np.ndarray
    profile_values: np.ndarray
    extremal_values: np.ndarray


def equality_certificate(f: ConcaveFunction, mu: MeasureSpec,
                         descriptor: ConcavityDescriptor,
                         t_nodes: int = T_NODES, tol: float = 1e-4,
                         rel_tol: float = 1e-8) -> EqualityCertificate:
    """Grid-level test of the extremal level-set identity.

    Certifies when mu({f >= t}) matches the transformed linear profile
    F^{-1}[F(mu(K)) (1 - t/max f)] within tol and F is zero anchored.
    """
    if descriptor.branch != "F":
        raise GeometryError("equality certificates require a zero-anchored branch")
    prof = level_profile(f, mu, rel_tol=rel_tol)
    total = prof.psi0
    M = f.fmax
    tt = 0.5 * M * (1.0 - np.cos(np.pi * np.arange(t_nodes) / (t_nodes - 1)))
    lhs = np.array([prof.eval(t) for t in tt])
    rhs = np.array([extremal_profile_value(descriptor, total, t / M) for t in tt])
    dev = float(np.max(np.abs(lhs - rhs)) / total)
    return EqualityCertificate(certified=bool(dev < tol and descriptor.zero_anchored),
                               sup_rel_deviation=dev,
                               zero_anchored=descriptor.zero_anchored,
                               t_grid=tt, profile_values=lhs, extremal_values=rhs)


# ---------------------------------------------------------------------------
# Half-space moment ratios and norm comparisons
# ---------------------------------------------------------------------------

@dataclass
class MomentRatioReport:
    lhs: float
    rhs: float
    margin: float
    halfspace_mass: float
    tail_bound: float
    p: float
    q: float


def _gaussian_box_tail(n: int, L: float) -> float:
    from scipy.special import ndtr
    return float(2 * n * ndtr(-L))


def halfspace_moment_ratio(mu: MeasureSpec, theta, p: float, q: float,
                           descriptor: ConcavityDescriptor,
                           box_radius: float = 8.0,
                           rel_tol: float = 1e-9) -> MomentRatioReport:
    """Compare positive directional moments against the concavity bound.

    lhs is the q-th positive moment root; rhs multiplies the p-th root by
    mass(H+)^(1/q-1/p) C(p)/C(q) with the constants of the descriptor taken
    at total mass mu(H+).  Moments are integrated over a truncated box and
    the truncation tail is reported.
    """
    if not -1.0 < p <= q:
        raise ValueError("need -1 < p <= q")
    theta = as_direction(theta)
    n = mu.n
    L = box_radius
    A = np.vstack([np.eye(n), -np.eye(n), -theta])
    b = np.concatenate([np.full(2 * n, L), [0.0]])
    half_box = body_from_halfspaces(A, b)
    mass = measure_of_body(mu, half_box, rel_tol=rel_tol).value

    def moment(r: float) -> float:
        def integrand(X):
            return np.maximum(X @ theta, 0.0) ** r * mu.density(X)
        return integrate_over_body(integrand, half_box, rel_tol=rel_tol).value

    m_p = moment(p)
    m_q = moment(q)
    lhs = m_q ** (1.0 / q)
    coeff = (mass ** (1.0 / q - 1.0 / p)
             * berwald_constant(p, descriptor, mass)
             / berwald_constant(q, descriptor, mass))
    rhs = coeff * m_p ** (1.0 / p)
    tail = _gaussian_box_tail(n, L) if mu.kind == "gaussian" else float("nan")
    return MomentRatioReport(lhs=float(lhs), rhs=float(rhs),
                             margin=float((rhs - lhs) / rhs),
                             halfspace_mass=mass, tail_bound=tail,
                             p=p, q=q)


@dataclass
class NormBoundReport:
    lhs: float
    rhs: float
    margin: float


def lq_l1_bound(f: ConcaveFunction, mu: MeasureSpec,
                descriptor: ConcavityDescriptor, beta: float, q: float,
                rel_tol: float = 1e-9) -> NormBoundReport:
    """L^q norm of f bounded through its L^1 norm when f^beta is concave."""
    if q < 1:
        raise ValueError("need q >= 1")
    total = measure_of_body(mu, f.K, rel_tol=rel_tol, cache=True).value

    def integrand_q(X):
        return f.eval_many(X) ** q * mu.density(X)

    def integrand_1(X):
        return f.eval_many(X) * mu.density(X)

    lhs = integrate_over_body(integrand_q, f.K, rel_tol=rel_tol).value ** (1.0 / q)
    l1 = integrate_over_body(integrand_1, f.K, rel_tol=rel_tol).value
    ratio = (berwald_constant(1.0 / beta, descriptor, total)
             / berwald_constant(q / beta, descriptor, total)) ** beta
    rhs = total ** ((1.0 - q) / q) * ratio ** (1.0 / beta) * l1
    return NormBoundReport(lhs=float(lhs), rhs=float(rhs),
                           margin=float((rhs - lhs) / max(rhs, 1e-300)))


@dataclass
class PerturbationReport:
    lhs: float
    rhs: float
    margin: float


def perturbation_check(K: ConvexBody, mu: MeasureSpec, psi: ConcaveFunction,
                       p: float, q: float,
                       rel_tol: float = 1e-9) -> PerturbationReport:
    """First-variation inequality around the roof-function equality case.

    For the homogeneous concave setting (Lebesgue here, s = 1/n) and
    0 < p <= q:  binom(1/s+p, 1/s) int roof^(p-1) psi dmu  >=
    binom(1/s+q, 1/s) int roof^(q-1) psi dmu.
    """
    if not mu.is_lebesgue:
        raise GeometryError("perturbation identity needs the homogeneous case")
    if not 0 < p <= q:
        raise ValueError("need 0 < p <= q")
    if not K.contains(np.zeros(K.n), 1e-9):
        raise GeometryError("roof anchored at the origin needs 0 in K")
    s = 1.0 / K.n
    roof = RoofFunction(K, 1.0, np.zeros(K.n))
    roof_fn = ConcaveFunction(K, roof=roof)

    def side(expo: float) -> float:
        def integrand(X):
            base = roof_fn.eval_many(X)
            out = np.zeros(len(base))
            pos = base > 0
            out[pos] = base[pos] ** (expo - 1.0) * psi.eval_many(X)[pos] \
                * mu.density(X)[pos]
            return out
        return integrate_over_body(integrand, K, rel_tol=rel_tol).value

    lhs = binom_real(1.0 / s + p, 1.0 / s) * side(p)
    rhs = binom_real(1.0 / s + q, 1.0 / s) * side(q)
    return PerturbationReport(lhs=float(lhs), rhs=float(rhs),
                              margin=float(lhs - rhs))
