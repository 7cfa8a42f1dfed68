import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from berwald import geometry as geo
from conftest import random_polytope, seeded

SQ2 = math.sqrt(2.0)


def test_support_square_axis(square):
    assert geo.support(square, [1, 0]) == pytest.approx(1.0, abs=1e-12)


def test_support_triangle_diagonal(triangle):
    val = geo.support(triangle, [1 / SQ2, 1 / SQ2])
    assert val == pytest.approx(1 / SQ2, abs=1e-9)


def test_support_of_difference_body(triangle):
    # oracle: Minkowski sum of vertex lists, convex hull, vertex max
    dk = geo.difference_body(triangle)
    sums = (triangle.vertices[:, None, :] - triangle.vertices[None, :, :]).reshape(-1, 2)
    oracle = float(np.max(sums @ np.array([1.0, 0.0])))
    assert geo.support(dk, [1, 0]) == pytest.approx(oracle, abs=1e-12)
    assert oracle == pytest.approx(1.0)


def test_radial_square_center(square):
    assert geo.radial(square, [0.5, 0.5], [1, 0]) == pytest.approx(0.5, abs=1e-12)


def test_radial_square_corner_diagonal(square):
    val = geo.radial(square, [1, 1], [1 / SQ2, 1 / SQ2])
    assert val == pytest.approx(SQ2, abs=1e-9)


def test_radial_triangle(triangle):
    val = geo.radial(triangle, [1 / 3, 1 / 3], [1, 0])
    assert val == pytest.approx(1 / 3, abs=1e-12)


def test_radial_outside_point_raises(square):
    with pytest.raises(geo.GeometryError):
        geo.radial(square, [2.0, 0.5], [1, 0])


def test_difference_body_square(square):
    dk = geo.difference_body(square)
    assert dk.volume == pytest.approx(4.0, abs=1e-12)
    assert dk.is_symmetric()


def test_difference_body_triangle_rogers_shephard(triangle):
    dk = geo.difference_body(triangle)
    assert dk.volume == pytest.approx(3.0, rel=1e-12)
    assert dk.volume / triangle.volume == pytest.approx(6.0, rel=1e-9)
    assert len(dk.b) == 6   # hexagon


def test_difference_of_symmetric_is_double(centered_square):
    dk = geo.difference_body(centered_square)
    assert dk.volume == pytest.approx(2 ** 2 * centered_square.volume, rel=1e-12)


def test_intersect_shift_square(square):
    body = geo.intersect_shift(square, [0.3, 0.0])
    assert body.volume == pytest.approx(0.7, abs=1e-12)
    lo, hi = body.vertices.min(axis=0), body.vertices.max(axis=0)
    assert lo[0] == pytest.approx(0.3, abs=1e-12)


def test_intersect_shift_empty(square):
    assert geo.intersect_shift(square, [2.0, 0.0]) is None


def test_intersect_shift_triangle_simplex_profile(triangle):
    # oracle: hull volume of the clipped intersection computed by qhull
    body = geo.intersect_shift(triangle, [0.5, 0.0])
    oracle = ConvexHull(body.vertices).volume
    assert body.volume == pytest.approx(oracle, rel=1e-12)
    assert body.volume == pytest.approx(0.125, abs=1e-12)


def test_intersect_shift_zero_is_identity(square):
    body = geo.intersect_shift(square, [0.0, 0.0])
    assert body.volume == pytest.approx(square.volume, abs=1e-12)
    assert len(body.b) == 4


def test_volume_examples(square, triangle):
    assert square.volume == pytest.approx(1.0, abs=1e-12)
    assert triangle.volume == pytest.approx(0.5, abs=1e-12)


def test_volume_matches_qhull_oracle():
    rng = seeded("vol_oracle")
    for n in (2, 3, 4):
        K = random_polytope(n, rng)
        assert K.volume == pytest.approx(ConvexHull(K.vertices).volume, rel=1e-10)


def test_roof_eval(square):
    roof = geo.RoofFunction(square, 1.0, [0.0, 0.0])
    assert roof([0.5, 0.0]) == pytest.approx(0.5, abs=1e-12)
    assert roof([0.0, 0.0]) == pytest.approx(1.0)
    assert roof([1.0, 0.3]) == pytest.approx(0.0, abs=1e-12)
    assert roof([1.4, 0.3]) == 0.0


def test_roof_affine_along_rays(triangle):
    roof = geo.RoofFunction(triangle, 2.0, [0.2, 0.2])
    rng = seeded("roof_rays")
    for _ in range(20):
        th = rng.standard_normal(2)
        th /= np.linalg.norm(th)
        r1 = triangle.radial_from([0.2, 0.2], th)
        tt = np.linspace(0, 1, 7)
        vals = [roof(np.array([0.2, 0.2]) - t * r1 * th) for t in tt]
        assert np.allclose(vals, 2.0 * (1 - tt), atol=1e-9)


def test_linear_image(square, triangle):
    assert geo.linear_image(square, np.eye(2)).volume == pytest.approx(1.0)
    body = geo.linear_image(square, np.diag([2.0, 0.5]))
    assert body.volume == pytest.approx(1.0, abs=1e-12)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert geo.linear_image(triangle, rot).volume == pytest.approx(0.5, abs=1e-12)


def test_linear_image_singular_raises(square):
    with pytest.raises(geo.GeometryError):
        geo.linear_image(square, np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_volume_scales_with_determinant():
    rng = seeded("det_scaling")
    for n in (2, 3):
        K = random_polytope(n, rng)
        T = rng.standard_normal((n, n)) + 2 * np.eye(n)
        img = geo.linear_image(K, T)
        assert img.volume == pytest.approx(abs(np.linalg.det(T)) * K.volume,
                                           rel=1e-9)


def test_support_sublinear():
    rng = seeded("sublinear")
    K = random_polytope(3, rng)
    for _ in range(50):
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        assert K.support(u + v) <= K.support(u) + K.support(v) + 1e-12


def test_difference_body_radial_symmetry():
    rng = seeded("dk_sym")
    K = random_polytope(2, rng)
    dk = geo.difference_body(K)
    for _ in range(24):
        th = rng.standard_normal(2)
        th /= np.linalg.norm(th)
        assert dk.radial_origin(th) == pytest.approx(dk.radial_origin(-th),
                                                     rel=1e-10)


def test_dk_radial_is_longest_chord():
    # rho_DK(theta) = sup over x in K of rho_K(x, theta), the longest chord
    # length in direction theta; the longest chord passes through a vertex,
    # so maximizing the chord through each vertex reaches the supremum
    rng = seeded("dk_radial")
    K = random_polytope(2, rng)
    dk = geo.difference_body(K)
    for _ in range(12):
        th = rng.standard_normal(2)
        th /= np.linalg.norm(th)
        chord = max(K.radial_from(v, th) + K.radial_from(v, -th)
                    for v in K.vertices)
        assert dk.radial_origin(th) == pytest.approx(chord, rel=1e-6)


def test_ray_extent(square):
    r = square.ray_extent(np.array([1.0, 1.0]) / SQ2)
    assert r[0] == pytest.approx(0.0)
    assert r[1] == pytest.approx(SQ2, rel=1e-12)
    shifted = square.translate([2.0, 2.0])
    r2 = shifted.ray_extent(np.array([1.0, 1.0]) / SQ2)
    assert r2[0] == pytest.approx(2 * SQ2, rel=1e-12)
    assert shifted.ray_extent(np.array([-1.0, 0.0])) is None


def test_hrep_vrep_consistency_guard():
    with pytest.raises(geo.GeometryError):
        geo.ConvexBody([[0, 0], [1, 0], [2, 0]])   # collinear
    with pytest.raises(geo.GeometryError):
        geo.ConvexBody([[0, 0], [1, 0]])


def test_body_from_halfspaces_roundtrip(square):
    body = geo.body_from_halfspaces(square.A, square.b)
    assert body.volume == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(geo.GeometryError):
        geo.body_from_halfspaces(np.array([[1.0, 0.0], [-1.0, 0.0]]),
                                 np.array([1.0, -2.0]))   # empty


def test_named_bodies():
    assert geo.cross_polytope(2).volume == pytest.approx(2.0)
    assert geo.simplex(3).volume == pytest.approx(1 / 6, rel=1e-12)
    assert geo.cube(3).volume == pytest.approx(1.0)
    assert geo.cube(2, centered=True).is_symmetric()


def test_homothet(triangle):
    h = triangle.homothet([0.0, 0.0], 0.5)
    assert h.volume == pytest.approx(triangle.volume * 0.25, rel=1e-12)
    assert h.contains([0.2, 0.2])
    assert not h.contains([0.6, 0.3])
