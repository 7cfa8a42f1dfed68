"""Singularity-aware 1-D integration for Mellin-type transforms, simplex
quadrature rules, direction-set generation and seeded random streams.

The Mellin transform here is the two-branch version used throughout the
toolkit: the plain integral of t^(p-1) psi(t) for p > 0, and the subtracted
analytic continuation for p in (-1, 0).  Endpoint singularities at t = 0 are
handled with QUADPACK's algebraic-weight rule; the continuation branch gets
an additional short Taylor segment near 0 so that evaluator noise cannot
pollute the nearly divergent weight t^(p-1) as p approaches -1.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator

MELLIN_REL_TOL = 1e-10     # target relative accuracy of a single transform
MELLIN_FLAG_TOL = 1e-3     # error estimates above this (relative) get flagged
PROFILE_NODES = 129        # default Chebyshev grid size of a Profile1D
MC_SAMPLES = 2 ** 20


class QuadratureError(ValueError):
    """Invalid transform order or profile for the requested operation."""


# ---------------------------------------------------------------------------
# 1-D profiles
# ---------------------------------------------------------------------------

def chebyshev_grid(B: float, nodes: int = PROFILE_NODES) -> np.ndarray:
    """Chebyshev-spaced grid on [0, B] including both endpoints."""
    k = np.arange(nodes)
    return B * 0.5 * (1.0 - np.cos(np.pi * k / (nodes - 1)))


@dataclass
class Profile1D:
    """Sampled nonnegative function on [0, B] with optional exact evaluator.

    The grid carries Chebyshev-spaced samples interpolated by a
    shape-preserving cubic; when an evaluator is present it is preferred for
    quadrature, the grid then serving for plots, monotonicity checks and
    derivative estimates.  eval_noise is the absolute noise floor of one
    evaluator call (quadrature-backed evaluators are not exact).
    """

    grid: np.ndarray | None
    values: np.ndarray | None
    B: float
    psi0: float
    monotone: bool = True
    evaluator: object = None
    eval_noise: float = 1e-13
    _interp: object = field(default=None, repr=False, compare=False)

    @classmethod
    def from_function(cls, fn, B: float, nodes: int = PROFILE_NODES,
                      monotone: bool = True, eval_noise: float = 1e-13,
                      horizon: float | None = None) -> "Profile1D":
        finite = np.isfinite(B)
        span = B if finite else (horizon if horizon is not None else 40.0)
        grid = chebyshev_grid(span, nodes)
        values = np.array([float(fn(t)) for t in grid])
        return cls(grid=grid, values=values, B=float(B), psi0=float(fn(0.0)),
                   monotone=monotone, evaluator=fn, eval_noise=eval_noise)

    @classmethod
    def from_samples(cls, grid, values, monotone: bool = True) -> "Profile1D":
        grid = np.asarray(grid, float)
        values = np.asarray(values, float)
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise QuadratureError("profile grid must start at 0 and increase")
        if np.any(values < -1e-12):
            raise QuadratureError("profile values must be nonnegative")
        return cls(grid=grid, values=np.maximum(values, 0.0), B=float(grid[-1]),
                   psi0=float(values[0]), monotone=monotone)

    def _interpolant(self):
        if self._interp is None:
            if self.grid is None:
                raise QuadratureError("profile has neither grid nor evaluator")
            self._interp = PchipInterpolator(self.grid, self.values,
                                             extrapolate=False)
        return self._interp

    def eval(self, t: float) -> float:
        if self.evaluator is not None:
            return float(self.evaluator(t))
        if t > self.B:
            return 0.0
        if t < 0.0:
            raise QuadratureError("profile evaluated at negative argument")
        return float(max(np.nan_to_num(self._interpolant()(t)), 0.0))

    def is_nonincreasing(self, tol: float = 1e-9) -> bool:
        if self.values is None:
            return self.monotone
        scale = max(abs(self.psi0), 1e-30)
        return bool(np.all(np.diff(self.values) <= tol * scale))

    def grid_view(self) -> "Profile1D":
        """Interpolant-backed copy: quadrature reuses the sampled grid
        instead of calling the (possibly expensive) evaluator."""
        if self.grid is None:
            return self
        return Profile1D(grid=self.grid, values=self.values, B=self.B,
                         psi0=self.psi0, monotone=self.monotone,
                         evaluator=None, eval_noise=self.eval_noise)


@dataclass
class MellinResult:
    value: float
    error: float
    p: float
    flagged: bool = False


def _quad(fn, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, a, b, **kw)


def _near_zero_slope(profile: Profile1D, delta: float):
    """Local model psi(t) - psi(0) ~ s*t + c*t^2 fitted at delta and 2*delta."""
    a = profile.psi0
    d1 = profile.eval(delta) - a
    d2 = profile.eval(2.0 * delta) - a
    c = (d2 - 2.0 * d1) / (2.0 * delta * delta)
    s = (4.0 * d1 - d2) / (2.0 * delta)
    return s, c


def mellin(profile: Profile1D, p: float,
           rel_tol: float = MELLIN_REL_TOL) -> MellinResult:
    """Two-branch Mellin transform of a profile supported on [0, B].

    For p > 0 this is the integral of t^(p-1) psi(t) over [0, B]; for
    p in (-1, 0) it is the analytic continuation
    integral of t^(p-1) (psi(t) - psi(0)) plus (B^p / p) psi(0).
    """
    if p <= -1.0:
        raise QuadratureError("Mellin transform requires p > -1")
    if p == 0.0:
        raise QuadratureError("p = 0 is handled by mellin_log_limit")
    B = profile.B
    f = profile.eval
    a0 = profile.psi0
    finite = np.isfinite(B)

    if p > 0.0:
        if p >= 1.0:
            if finite:
                val, err = _quad(lambda t: t ** (p - 1.0) * f(t), 0.0, B,
                                 limit=400, epsabs=1e-14, epsrel=rel_tol)
            else:
                v1, e1 = _quad(lambda t: t ** (p - 1.0) * f(t), 0.0, 1.0,
                               limit=400, epsabs=1e-14, epsrel=rel_tol)
                v2, e2 = _quad(lambda t: t ** (p - 1.0) * f(t), 1.0, np.inf,
                               limit=400, epsabs=1e-14, epsrel=rel_tol)
                val, err = v1 + v2, e1 + e2
        else:
            # algebraic endpoint weight t^(p-1) via QUADPACK QAWS
            hi = B if finite else 1.0
            val, err = _quad(f, 0.0, hi, weight="alg", wvar=(p - 1.0, 0.0),
                             limit=400, epsabs=1e-14, epsrel=rel_tol)
            if not finite:
                v2, e2 = _quad(lambda t: t ** (p - 1.0) * f(t), 1.0, np.inf,
                               limit=400, epsabs=1e-14, epsrel=rel_tol)
                val, err = val + v2, err + e2
    else:
        # p in (-1, 0): subtracted integrand (psi - psi0), singular weight t^p
        if profile.evaluator is not None:
            span = B if finite else 1.0
            delta = span * 1e-6
            s, c = _near_zero_slope(profile, delta)
            if abs(s) > 0:
                # widen the Taylor segment until evaluator noise is harmless
                delta = min(span * 1e-2,
                            max(delta, 64.0 * profile.eval_noise / abs(s)))
                s, c = _near_zero_slope(profile, delta)
            head = (s * delta ** (p + 1.0) / (p + 1.0)
                    + c * delta ** (p + 2.0) / (p + 2.0))
            pts = np.geomspace(delta, max(span, delta * 4), 24)
            hi = B if finite else 1.0
            body_val, body_err = _quad(
                lambda t: t ** (p - 1.0) * (f(t) - a0), delta, hi,
                limit=800, epsabs=1e-14, epsrel=rel_tol,
                points=pts[(pts > delta) & (pts < hi)])
            val = head + body_val
            err = body_err + abs(c) * delta ** (p + 2.0) / abs(p + 2.0)
        else:
            hi = B if finite else 1.0
            eps0 = hi * 1e-9

            def subtracted(t):
                if t < eps0:      # QAWS probes the endpoint itself
                    return (f(eps0) - a0) / eps0
                return (f(t) - a0) / t

            val, err = _quad(subtracted, 0.0, hi, weight="alg", wvar=(p, 0.0),
                             limit=400, epsabs=1e-14, epsrel=rel_tol)
        if finite:
            val += B ** p / p * a0
        else:
            v2, e2 = _quad(lambda t: t ** (p - 1.0) * f(t), 1.0, np.inf,
                           limit=400, epsabs=1e-14, epsrel=rel_tol)
            val += v2 + a0 / p
            err += e2

    flagged = not np.isfinite(val) or err > MELLIN_FLAG_TOL * max(abs(val), 1e-300)
    return MellinResult(value=float(val), error=float(err), p=float(p),
                        flagged=bool(flagged))


def mellin_log_limit(profile: Profile1D) -> float:
    """p -> 0 limit used for the p = 0 member of Mellin-normalized families.

    Equals the geometric mean exp( integral of log t with respect to the
    (normalized) decrement measure -d psi / psi(0) ), computed through the
    integrated-by-parts form that avoids differentiating the profile.
    """
    if not profile.is_nonincreasing():
        raise QuadratureError("log-limit requires a nonincreasing profile")
    a0 = profile.psi0
    if a0 <= 0:
        raise QuadratureError("log-limit requires psi(0) > 0")
    f = profile.eval
    B = profile.B
    if np.isfinite(B):
        tail, e1 = _quad(lambda t: (a0 - f(t)) / t, 0.0, B,
                         limit=400, epsabs=1e-14, epsrel=1e-10)
        log_int = a0 * np.log(B) - tail
    else:
        head, _ = _quad(lambda t: (a0 - f(t)) / t, 0.0, 1.0,
                        limit=400, epsabs=1e-14, epsrel=1e-10)
        tail, _ = _quad(lambda t: f(t) / t, 1.0, np.inf,
                        limit=400, epsabs=1e-14, epsrel=1e-10)
        log_int = tail - head
    return float(np.exp(log_int / a0))


@dataclass
class FractionalLimitReport:
    s_values: tuple
    values: tuple
    extrapolated: float
    target: float
    deviation: float


def fractional_limit_check(profile: Profile1D,
                           s_values=(0.9, 0.99, 0.999)) -> FractionalLimitReport:
    """Evaluate (1-s) * integral of t^(-s) psi(t) near s = 1.

    The limit as s -> 1 must recover psi(0); the report carries the sampled
    values, a linear-in-(1-s) extrapolation and its deviation from psi(0).
    """
    vals = []
    for s in s_values:
        res = mellin(profile, 1.0 - s)
        vals.append((1.0 - s) * res.value)
    e = [1.0 - s for s in s_values]
    v_ext = vals[-1] - e[-1] * (vals[-1] - vals[-2]) / (e[-1] - e[-2])
    return FractionalLimitReport(
        s_values=tuple(s_values), values=tuple(vals), extrapolated=float(v_ext),
        target=profile.psi0, deviation=float(abs(v_ext - profile.psi0)))


# ---------------------------------------------------------------------------
# Direction sets and sphere quadrature
# ---------------------------------------------------------------------------

@dataclass
class DirectionSet:
    n: int
    vectors: np.ndarray
    scheme: str
    seed: int | None = None
    symmetric: bool = False

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)


def directions(n: int, count: int, scheme: str = "auto",
               seed: int | None = None, symmetric: bool = False) -> DirectionSet:
    """Deterministic unit-vector sets: uniform angles (n=2), Fibonacci sphere
    (n=3), seeded normalized Gaussians (n >= 4)."""
    if count < 1:
        raise QuadratureError("direction count must be >= 1")
    if scheme == "auto":
        scheme = {2: "uniform", 3: "fibonacci"}.get(n, "seeded")
    if symmetric and count % 2:
        count += 1
    if scheme == "uniform":
        if n != 2:
            raise QuadratureError("uniform angle scheme is 2-D only")
        ang = 2.0 * np.pi * np.arange(count) / count
        vecs = np.column_stack([np.cos(ang), np.sin(ang)])
    elif scheme == "fibonacci":
        if n != 3:
            raise QuadratureError("fibonacci scheme is 3-D only")
        m = count // 2 if symmetric else count
        i = np.arange(m)
        z = 1.0 - 2.0 * (i + 0.5) / m
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        golden = np.pi * (3.0 - np.sqrt(5.0))
        phi = golden * i
        vecs = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        if symmetric:
            vecs = np.vstack([vecs, -vecs])
    elif scheme == "seeded":
        rng = rng_stream(0 if seed is None else seed, "directions", n, count)
        m = count // 2 if symmetric else count
        raw = rng.standard_normal((m, n))
        vecs = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        if symmetric:
            vecs = np.vstack([vecs, -vecs])
    else:
        raise QuadratureError(f"unknown direction scheme '{scheme}'")
    return DirectionSet(n=n, vectors=vecs, scheme=scheme, seed=seed,
                        symmetric=symmetric)


def sphere_quadrature(n: int, resolution: int = 0):
    """Nodes and weights integrating over the unit sphere S^(n-1).

    n=2 uses the (spectrally accurate) periodic trapezoid rule, n=3 a
    Gauss-Legendre x trapezoid product grid in cylindrical coordinates,
    n>=4 equal-weight seeded Monte Carlo.
    """
    if n == 2:
        m = resolution or 4096
        ang = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
        w = np.full(m, 2.0 * np.pi / m)
        return pts, w
    if n == 3:
        mz = resolution or 400
        mphi = 2 * mz
        z, wz = np.polynomial.legendre.leggauss(mz)
        phi = 2.0 * np.pi * (np.arange(mphi) + 0.5) / mphi
        Z, PHI = np.meshgrid(z, phi, indexing="ij")
        R = np.sqrt(np.maximum(1.0 - Z * Z, 0.0))
        pts = np.column_stack([(R * np.cos(PHI)).ravel(),
                               (R * np.sin(PHI)).ravel(), Z.ravel()])
        w = np.repeat(wz, mphi) * (2.0 * np.pi / mphi)
        return pts, w
    m = resolution or 2 ** 14
    rng = rng_stream(1234, "sphere", n, m)
    raw = rng.standard_normal((m, n))
    pts = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    area = 2.0 * np.pi ** (n / 2.0) / _gamma_half(n)
    return pts, np.full(m, area / m)


def _gamma_half(n: int) -> float:
    from scipy.special import gamma
    return float(gamma(n / 2.0))


def rng_stream(seed: int, *key) -> np.random.Generator:
    """Counter-based splittable stream: identical under any task schedule."""
    digest = hashlib.blake2b(repr((seed,) + key).encode(), digest_size=16)
    return np.random.Generator(
        np.random.Philox(key=int.from_bytes(digest.digest()[:8], "big")))


# ---------------------------------------------------------------------------
# Grundmann-Moller simplex quadrature
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@lru_cache(maxsize=None)
def simplex_rule(n: int, s: int = 3):
    """Embedded Grundmann-Moller rule of degree 2s+1 on the unit n-simplex.

    Returns (points, w_hi, w_lo): barycentric nodes (m, n+1), weights of the
    degree 2s+1 rule, and weights of the embedded degree 2s-1 rule (zero on
    the newest layer) used for error estimation.  Weights integrate over the
    unit simplex of volume 1/n!.
    """
    d = 2 * s + 1
    pts, w_hi, w_lo = [], [], []
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = ((-1) ** i * 2.0 ** (-2 * s) * denom ** d
             / (_fact(i) * _fact(d + n - i)))
        if s >= 1 and i >= 1:
            # same nodes appear in the degree 2s-1 rule at layer i-1
            d2 = 2 * (s - 1) + 1
            w2 = ((-1) ** (i - 1) * 2.0 ** (-2 * (s - 1)) * denom ** d2
                  / (_fact(i - 1) * _fact(d2 + n - (i - 1))))
        else:
            w2 = 0.0
        for beta in _compositions(s - i, n + 1):
            pts.append([(2 * bj + 1) / denom for bj in beta])
            w_hi.append(w)
            w_lo.append(w2)
    return (np.asarray(pts, float), np.asarray(w_hi, float),
            np.asarray(w_lo, float))


def _fact(k: int) -> float:
    out = 1.0
    for i in range(2, k + 1):
        out *= i
    return out


def _simplex_volume(verts: np.ndarray) -> float:
    mat = verts[1:] - verts[0]
    if mat.shape[0] == mat.shape[1]:
        return abs(np.linalg.det(mat)) / _fact(mat.shape[0])
    gram = mat @ mat.T
    return np.sqrt(max(np.linalg.det(gram), 0.0)) / _fact(mat.shape[0])


def _gm_eval(fn, verts: np.ndarray, s: int):
    """One Grundmann-Moller evaluation: (value, embedded error estimate)."""
    k = verts.shape[0] - 1
    pts, w_hi, w_lo = simplex_rule(k, s)
    x = pts @ verts
    vals = np.asarray(fn(x), float)
    scale = _simplex_volume(verts) * _fact(k)
    hi = scale * float(w_hi @ vals)
    lo = scale * float(w_lo @ vals)
    return hi, abs(hi - lo)


def integrate_simplices(fn, simplices, rel_tol: float = 1e-7,
                        abs_tol: float = 1e-14, max_splits: int = 4000,
                        s: int = 3):
    """Adaptive integration of a vectorized integrand over a simplex list.

    Refines by longest-edge bisection of the piece with the largest embedded
    Grundmann-Moller error until the summed estimate meets the tolerance.
    Returns (value, error_estimate).  Deterministic: ties broken by insertion
    order, summation in fixed order at the end.
    """
    import heapq

    items = []
    counter = 0
    for verts in simplices:
        verts = np.asarray(verts, float)
        val, err = _gm_eval(fn, verts, s)
        items.append((-err, counter, verts, val, err))
        counter += 1
    heapq.heapify(items)
    splits = 0
    while splits < max_splits:
        total_val = sum(it[3] for it in items)
        total_err = sum(it[4] for it in items)
        if total_err <= max(rel_tol * abs(total_val), abs_tol):
            break
        neg_err, _, verts, _, err = heapq.heappop(items)
        if err <= 0:
            heapq.heappush(items, (neg_err, counter, verts, -neg_err, err))
            break
        edges = verts[:, None, :] - verts[None, :, :]
        d2 = (edges ** 2).sum(axis=2)
        i, j = np.unravel_index(np.argmax(d2), d2.shape)
        mid = 0.5 * (verts[i] + verts[j])
        for drop in (i, j):
            child = verts.copy()
            child[drop] = mid
            cval, cerr = _gm_eval(fn, child, s)
            heapq.heappush(items, (-cerr, counter, child, cval, cerr))
            counter += 1
        splits += 1
    ordered = sorted(items, key=lambda it: it[1])
    value = float(sum(it[3] for it in ordered))
    error = float(sum(it[4] for it in ordered))
    return value, error
