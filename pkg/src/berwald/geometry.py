"""Polytope geometry kernel.

Bounded, full-dimensional polytopes carried in dual representation
(unit-normal H-rep ``A x <= b`` plus vertex list), with cached volume,
centroid and facet data.  Everything downstream (covariograms, level sets,
projection bodies) reduces to support/radial evaluations, shifted
intersections and exact fan volumes of these bodies.

Bodies are immutable; operations return new bodies.  Convex hulls are
delegated to Qhull via scipy.spatial.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

GEOM_TOL = 1e-9      # H-rep / V-rep consistency tolerance
UNIT_TOL = 1e-12     # direction normalization tolerance
EMPTY_VOL = 1e-12    # intersections thinner than this count as empty


class GeometryError(ValueError):
    """Degenerate body, singular map, or point outside its required domain."""


def as_direction(v) -> np.ndarray:
    """Normalize v to a unit vector; reject near-zero input."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm < UNIT_TOL:
        raise GeometryError("direction vector has near-zero norm")
    return v / nrm


def _chebyshev_center(A, b):
    """Largest inscribed ball of {A x <= b} for unit-row A: (center, radius)."""
    m, n = A.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(0, None)],
                  method="highs")
    if not res.success:
        return None, -np.inf
    return res.x[:-1], res.x[-1]


def _clip_polygon(verts, a, beta):
    """Clip a CCW convex polygon by the halfplane a.x <= beta."""
    vals = verts @ a - beta
    if np.all(vals <= GEOM_TOL):
        return verts
    out = []
    m = len(verts)
    for i in range(m):
        p, q = verts[i], verts[(i + 1) % m]
        vp, vq = vals[i], vals[(i + 1) % m]
        if vp <= 0.0:
            out.append(p)
        if (vp < 0.0 < vq) or (vq < 0.0 < vp):
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
    if len(out) < 3:
        return np.empty((0, verts.shape[1]))
    return np.asarray(out)


class ConvexBody:
    """Bounded full-dimensional polytope with consistent H-rep and V-rep.

    Attributes:
        n: ambient dimension (>= 2)
        vertices: (k, n) array of hull vertices
        A, b: deduplicated facet inequalities A x <= b with unit rows of A
        volume: exact fan-decomposition volume
        centroid: volume centroid
    """

    __slots__ = ("n", "vertices", "A", "b", "volume", "centroid",
                 "_pieces", "_key")

    def __init__(self, vertices, validate: bool = True):
        pts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < pts.shape[1] + 1:
            raise GeometryError("need at least n+1 points for a full-dimensional body")
        self.n = pts.shape[1]
        if self.n < 2:
            raise GeometryError("dimension must be >= 2")
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise GeometryError(f"degenerate vertex set: {exc}") from exc
        self.vertices = pts[hull.vertices]
        # Qhull equations are [normal | offset] with normal.x + offset <= 0
        # and unit normals; facets come triangulated for n >= 3, so merge
        # coplanar pieces into unique (a, b) rows.
        eqs = hull.equations
        A_all, b_all = eqs[:, :-1], -eqs[:, -1]
        keys = np.round(np.hstack([A_all, b_all[:, None]]), 9)
        _, idx = np.unique(keys, axis=0, return_index=True)
        self.A = A_all[np.sort(idx)]
        self.b = b_all[np.sort(idx)]
        # Simplicial facet pieces: (vertex array, unit normal, (n-1)-measure).
        pieces = []
        fact = _factorial(self.n - 1)
        for simplex, eq in zip(hull.simplices, eqs):
            pv = pts[simplex]
            edges = pv[1:] - pv[0]
            gram = edges @ edges.T
            meas = np.sqrt(max(np.linalg.det(gram), 0.0)) / fact
            pieces.append((pv, eq[:-1], meas))
        self._pieces = pieces
        # Exact volume and volume centroid by a fan from the vertex mean.
        apex = self.vertices.mean(axis=0)
        vol = 0.0
        mom = np.zeros(self.n)
        nfact = _factorial(self.n)
        for pv, _, _ in pieces:
            mat = pv - apex
            sv = abs(np.linalg.det(mat)) / nfact
            vol += sv
            mom += sv * (apex + pv.sum(axis=0)) / (self.n + 1)
        self.volume = vol
        self.centroid = mom / vol if vol > 0 else apex
        self._key = None
        if validate:
            self._validate()

    def _validate(self):
        scale = max(1.0, np.abs(self.vertices).max())
        if not np.all(np.isfinite(self.vertices)):
            raise GeometryError("non-finite vertex")
        if self.volume <= GEOM_TOL * scale ** self.n:
            raise GeometryError("body is not full-dimensional")
        resid = self.vertices @ self.A.T - self.b
        if resid.max() > GEOM_TOL * scale:
            raise GeometryError("H-rep and V-rep inconsistent")
        on_facet = np.abs(resid) <= GEOM_TOL * scale
        if np.any(on_facet.sum(axis=0) < self.n):
            raise GeometryError("a facet supports fewer than n vertices")

    # -- basic queries ----------------------------------------------------

    def contains(self, x, tol: float = GEOM_TOL) -> bool:
        return bool(np.all(self.A @ np.asarray(x, float) <= self.b + tol))

    def support(self, theta) -> float:
        """h_K(theta) = max over vertices of <v, theta>."""
        return float(np.max(self.vertices @ np.asarray(theta, float)))

    def radial_from(self, x, theta) -> float:
        """sup{lam >= 0 : x - lam*theta in K}, the generalized radial function.

        Sign convention: the ray runs from x in direction -theta, so that
        rho_K(x, theta) = rho_{K-x}(-theta).
        """
        x = np.asarray(x, float)
        if not self.contains(x, 1e-7):
            raise GeometryError("base point lies outside the body")
        denom = -(self.A @ np.asarray(theta, float))
        num = self.b - self.A @ x
        mask = denom > 1e-14
        if not np.any(mask):
            raise GeometryError("unbounded ray (body not bounded?)")
        return float(max(0.0, np.min(num[mask] / denom[mask])))

    def radial_origin(self, theta) -> float:
        """sup{lam >= 0 : lam*theta in K}; requires 0 in K."""
        denom = self.A @ np.asarray(theta, float)
        mask = denom > 1e-14
        if not np.any(mask):
            raise GeometryError("unbounded ray")
        return float(max(0.0, np.min(self.b[mask] / denom[mask])))

    def ray_extent(self, theta):
        """Entry/exit radii (r0, r1) of the ray {r*theta : r >= 0}; None if it misses."""
        theta = np.asarray(theta, float)
        denom = self.A @ theta
        r_hi = np.inf
        r_lo = 0.0
        pos = denom > 1e-14
        neg = denom < -1e-14
        if np.any(pos):
            r_hi = np.min(self.b[pos] / denom[pos])
        if np.any(neg):
            r_lo = max(0.0, np.max(self.b[neg] / denom[neg]))
        if r_lo > r_hi - 1e-15:
            return None
        return r_lo, r_hi

    def gauge(self, x) -> float:
        """Minkowski functional ||x||_K = inf{r > 0 : x in rK}; requires 0 in int K."""
        vals = (self.A @ np.asarray(x, float)) / self.b
        return float(np.max(vals))

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        """True if K = -K as vertex sets."""
        v = self.vertices
        order = np.lexsort(v.T)
        order_neg = np.lexsort((-v).T)
        return bool(np.allclose(v[order], -v[order_neg], atol=tol))

    # -- constructive operations ------------------------------------------

    def translate(self, v) -> "ConvexBody":
        """Shift by v; all cached data translates, no hull recomputation."""
        v = np.asarray(v, float)
        out = object.__new__(ConvexBody)
        out.n = self.n
        out.vertices = self.vertices + v
        out.A = self.A
        out.b = self.b + self.A @ v
        out.volume = self.volume
        out.centroid = self.centroid + v
        out._pieces = [(pv + v, nrm, meas) for pv, nrm, meas in self._pieces]
        out._key = None
        return out

    def linear_image(self, T) -> "ConvexBody":
        T = np.asarray(T, float)
        if abs(np.linalg.det(T)) < 1e-12:
            raise GeometryError("linear map is singular")
        return ConvexBody(self.vertices @ T.T, validate=False)

    def homothet(self, center, lam: float) -> "ConvexBody":
        """center + lam (K - center) for lam > 0, without hull recomputation."""
        center = np.asarray(center, float)
        lam = float(lam)
        if lam <= 0:
            raise GeometryError("homothety ratio must be positive")
        out = object.__new__(ConvexBody)
        out.n = self.n
        out.vertices = center + lam * (self.vertices - center)
        out.A = self.A
        out.b = lam * self.b + (1.0 - lam) * (self.A @ center)
        out.volume = self.volume * lam ** self.n
        out.centroid = center + lam * (self.centroid - center)
        out._pieces = [(center + lam * (pv - center), nrm,
                        meas * lam ** (self.n - 1))
                       for pv, nrm, meas in self._pieces]
        out._key = None
        return out

    def scale(self, t: float) -> "ConvexBody":
        return ConvexBody(self.vertices * float(t), validate=False)

    def facet_pieces(self):
        """Simplicial facet pieces as (vertices, outward unit normal, measure)."""
        return self._pieces

    def cache_key(self):
        if self._key is None:
            self._key = self.vertices.round(12).tobytes()
        return self._key

    def __repr__(self):
        return (f"ConvexBody(n={self.n}, vertices={len(self.vertices)}, "
                f"facets={len(self.b)}, volume={self.volume:.6g})")


def _factorial(k: int) -> float:
    out = 1.0
    for i in range(2, k + 1):
        out *= i
    return out


# -- named constructors ----------------------------------------------------

def simplex(n: int) -> ConvexBody:
    """Standard simplex conv{0, e_1, ..., e_n}."""
    return ConvexBody(np.vstack([np.zeros(n), np.eye(n)]))


def cube(n: int, centered: bool = False) -> ConvexBody:
    """Unit cube [0,1]^n, or [-1,1]^n when centered."""
    corners = np.array(np.meshgrid(*([[0.0, 1.0]] * n))).reshape(n, -1).T
    if centered:
        corners = 2.0 * corners - 1.0
    return ConvexBody(corners)


def cross_polytope(n: int) -> ConvexBody:
    """conv{+-e_i}."""
    return ConvexBody(np.vstack([np.eye(n), -np.eye(n)]))


def body_from_vertices(points) -> ConvexBody:
    return ConvexBody(points)


def body_from_halfspaces(A, b) -> ConvexBody:
    """Body from inequalities A x <= b; raises GeometryError if empty/unbounded."""
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float).ravel()
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms < UNIT_TOL):
        raise GeometryError("zero normal row in H-rep")
    A = A / norms[:, None]
    b = b / norms
    center, radius = _chebyshev_center(A, b)
    if center is None or radius <= 1e-12:
        raise GeometryError("H-rep is empty or lower-dimensional")
    try:
        hi = HalfspaceIntersection(np.hstack([A, -b[:, None]]), center)
    except QhullError as exc:
        raise GeometryError(f"halfspace intersection failed: {exc}") from exc
    return ConvexBody(hi.intersections)


# -- spec operations --------------------------------------------------------

def support(K: ConvexBody, theta) -> float:
    return K.support(as_direction(theta))


def radial(K: ConvexBody, x, theta) -> float:
    return K.radial_from(x, as_direction(theta))


def volume(K: ConvexBody) -> float:
    return K.volume


def minkowski_sum(K: ConvexBody, L: ConvexBody) -> ConvexBody:
    sums = (K.vertices[:, None, :] + L.vertices[None, :, :]).reshape(-1, K.n)
    return ConvexBody(sums, validate=False)


def difference_body(K: ConvexBody) -> ConvexBody:
    """DK = K + (-K), always symmetric with 0 in the interior."""
    return minkowski_sum(K, ConvexBody(-K.vertices, validate=False))


def linear_image(K: ConvexBody, T) -> ConvexBody:
    return K.linear_image(T)


def _clip_vertices(K: ConvexBody, x: np.ndarray):
    """CCW vertices of K intersect (K + x) for n = 2, or None when empty."""
    verts = K.vertices
    for a_row, beta in zip(K.A, K.b + K.A @ x):
        verts = _clip_polygon(verts, a_row, beta)
        if len(verts) == 0:
            return None
    return verts


def intersect_shift_volume(K: ConvexBody, x) -> float:
    """Volume of K intersect (K + x); shoelace fast path in the plane."""
    x = np.asarray(x, float)
    if K.n == 2:
        verts = _clip_vertices(K, x)
        if verts is None:
            return 0.0
        nxt = np.roll(verts, -1, axis=0)
        area = 0.5 * abs(float((verts[:, 0] * nxt[:, 1]
                                - verts[:, 1] * nxt[:, 0]).sum()))
        return area if area >= EMPTY_VOL else 0.0
    body = intersect_shift(K, x)
    return 0.0 if body is None else body.volume


def intersect_shift(K: ConvexBody, x):
    """K intersect (K + x), or None when empty or lower-dimensional.

    Both copies share the normal matrix, so the H-rep is A y <= min(b, b + A x).
    Volumes below EMPTY_VOL are clamped to empty for hull robustness.
    """
    x = np.asarray(x, float)
    b_shift = np.minimum(K.b, K.b + K.A @ x)
    if K.n == 2:
        verts = _clip_vertices(K, x)
        if verts is None:
            return None
        try:
            body = ConvexBody(verts, validate=False)
        except GeometryError:
            return None
    else:
        center, radius = _chebyshev_center(K.A, b_shift)
        if center is None or radius <= 1e-13:
            return None
        try:
            hi = HalfspaceIntersection(np.hstack([K.A, -b_shift[:, None]]), center)
            body = ConvexBody(hi.intersections, validate=False)
        except (QhullError, GeometryError):
            return None
    if body.volume < EMPTY_VOL:
        return None
    return body


class RoofFunction:
    """Cone-graph function of height M over base K with apex above x0.

    Evaluates to M at x0, to 0 on the boundary and outside of K, and is
    affine along every ray emanating from x0.
    """

    def __init__(self, K: ConvexBody, height: float = 1.0, apex=None):
        if height <= 0:
            raise GeometryError("roof height must be positive")
        self.K = K
        self.height = float(height)
        self.apex = np.zeros(K.n) if apex is None else np.asarray(apex, float)
        if not K.contains(self.apex, 1e-9):
            raise GeometryError("roof apex must lie in the body")
        # Gauge denominators of K - x0; all > 0 when x0 is interior, and the
        # max formula below stays valid when x0 sits on the boundary.
        self._den = K.b - K.A @ self.apex

    def __call__(self, x) -> float:
        y = np.asarray(x, float) - self.apex
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(self._den > 1e-14, (self.K.A @ y) / self._den,
                              np.where(self.K.A @ y > 1e-14, np.inf, -np.inf))
        gauge = float(np.max(ratios))
        return self.height * max(0.0, 1.0 - gauge)

    def level_set(self, t: float):
        """{roof >= t} = (t/M) x0 + (1 - t/M) K, an exact homothet."""
        if t <= 0:
            return self.K
        if t >= self.height:
            return None
        return self.K.homothet(self.apex, 1.0 - t / self.height)


def roof_eval(R: RoofFunction, x) -> float:
    return R(x)
