import math

import numpy as np
import pytest

from capcover.errors import CenterNotInterior, DegenerateInput
from capcover.geometry import (
    AffineMap,
    Polytope,
    apply_map,
    cap_volume,
    convex_hull,
    disjoint,
    face_lattice,
    flat_centroid_area,
    halfspace_intersection,
    orthonormal_frame,
    slice_points,
    slice_polytope,
)


def cube(d, half=1.0):
    corners = np.array(np.meshgrid(*[[-half, half]] * d)).reshape(d, -1).T
    return convex_hull(corners)


def simplex(d):
    pts = np.vstack([np.zeros(d), np.eye(d)])
    return convex_hull(pts)


def random_polytope(d, n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, d))
    return convex_hull(pts)


def test_cube_hull_counts():
    for d in (2, 3, 4):
        P = cube(d)
        assert P.n_vertices == 2**d
        assert P.n_facets == 2 * d
        assert P.volume == pytest.approx(2.0**d)
        assert np.allclose(P.centroid, 0.0, atol=1e-12)


def test_simplex_volume():
    for d in (2, 3, 4, 5):
        P = simplex(d)
        assert P.volume == pytest.approx(1.0 / math.factorial(d))


def test_degenerate_hull_rejected():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateInput):
        convex_hull(pts)


def test_face_lattice_cube_3d():
    prof = cube(3).face_lattice()
    assert prof.f_vector == (8, 12, 6)
    assert prof.total == 26


def test_face_lattice_simplex():
    for d in (2, 3, 4):
        prof = simplex(d).face_lattice()
        expect = tuple(math.comb(d + 1, k + 1) for k in range(d))
        assert prof.f_vector == expect


def test_halfspace_intersection_roundtrip():
    P = random_polytope(3, 30, seed=5)
    c = P.centroid
    Q = halfspace_intersection((P.normals, P.offsets), c)
    assert Q.volume == pytest.approx(P.volume, rel=1e-9)
    assert Q.n_vertices == P.n_vertices


def test_halfspace_intersection_needs_interior_point():
    P = cube(2)
    with pytest.raises(CenterNotInterior):
        halfspace_intersection((P.normals, P.offsets), np.array([5.0, 0.0]))


def test_incidence_lazy_and_correct():
    P = cube(3)
    assert P._incidence is None or isinstance(P._incidence, list)
    inc = P.incidence
    assert len(inc) == 6
    assert all(len(s) == 4 for s in inc)


def test_apply_map_volume_and_membership():
    P = random_polytope(3, 20, seed=1)
    rng = np.random.default_rng(2)
    L = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    T = AffineMap(L, rng.standard_normal(3))
    Q = apply_map(T, P)
    assert Q.volume == pytest.approx(abs(np.linalg.det(L)) * P.volume, rel=1e-8)
    pts = rng.standard_normal((200, 3)) * 0.4
    inside = P.contains_many(pts)
    mapped = T.apply(pts)
    assert np.array_equal(Q.contains_many(mapped, tol=1e-7), inside)


def test_affine_map_inverse_compose():
    rng = np.random.default_rng(3)
    L = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    T = AffineMap(L, rng.standard_normal(3))
    I = T.compose(T.inverse())
    assert np.allclose(I.linear, np.eye(3), atol=1e-10)
    assert np.allclose(I.translation, 0.0, atol=1e-10)


def test_disjoint_separated_cubes():
    P = cube(2)
    Q = apply_map(AffineMap(np.eye(2), np.array([3.0, 0.0])), cube(2))
    flag, w = disjoint(P, Q)
    assert flag
    assert w is not None
    assert np.max(P.vertices @ w.normal) <= w.offset + 1e-9
    assert np.min(Q.vertices @ w.normal) >= w.offset - 1e-9


def test_disjoint_overlapping_cubes():
    P = cube(2)
    Q = apply_map(AffineMap(np.eye(2), np.array([1.5, 0.0])), cube(2))
    flag, _ = disjoint(P, Q)
    assert not flag


def test_disjoint_facet_touching_counts_as_intersecting():
    P = cube(2)
    Q = apply_map(AffineMap(np.eye(2), np.array([2.0, 0.0])), cube(2))
    flag, _ = disjoint(P, Q)
    assert not flag


def test_cap_volume_slab():
    P = cube(3)
    v = cap_volume(P, np.array([0.0, 0.0, 1.0]), 0.5)
    assert v == pytest.approx(0.5 * 4.0)


def test_cap_volume_corner_simplex():
    # small diagonal cap of the cube is a corner simplex of leg w*sqrt(d)
    for d in (2, 3):
        P = cube(d)
        u = np.ones(d) / math.sqrt(d)
        w = 0.05
        offset = P.support(u) - w
        leg = w * math.sqrt(d)
        assert cap_volume(P, u, offset) == pytest.approx(
            leg**d / math.factorial(d), rel=1e-9)


def test_cap_volume_monte_carlo_random_polytope():
    P = random_polytope(3, 25, seed=11)
    rng = np.random.default_rng(12)
    u = rng.standard_normal(3)
    u /= np.linalg.norm(u)
    offset = 0.3 * P.support(u)
    exact = cap_volume(P, u, offset)
    lo = P.vertices.min(axis=0)
    hi = P.vertices.max(axis=0)
    n = 400_000
    pts = rng.uniform(lo, hi, size=(n, 3))
    inside = P.contains_many(pts) & (pts @ u >= offset)
    box = float(np.prod(hi - lo))
    est = box * inside.mean()
    sigma = box * math.sqrt(inside.mean() * (1 - inside.mean()) / n)
    assert abs(est - exact) <= 4 * sigma + 1e-12


def test_slice_points_on_plane():
    P = cube(3)
    pts = slice_points(P, np.array([0.0, 0.0, 1.0]), 0.25)
    assert np.allclose(pts[:, 2], 0.25)
    flat = pts[:, :2]
    assert flat.min() == pytest.approx(-1.0)
    assert flat.max() == pytest.approx(1.0)


def test_slice_polytope_area():
    P = cube(3)
    out = slice_polytope(P, np.array([0.0, 0.0, 1.0]), 0.0)
    assert out is not None
    flat, origin, frame = out
    c, area = flat_centroid_area(flat)
    assert area == pytest.approx(4.0)
    assert np.allclose(c, 0.0, atol=1e-12)


def test_orthonormal_frame():
    rng = np.random.default_rng(4)
    for _ in range(20):
        u = rng.standard_normal(4)
        u /= np.linalg.norm(u)
        R = orthonormal_frame(u)
        assert np.allclose(R @ R.T, np.eye(4), atol=1e-12)
        e = np.zeros(4)
        e[-1] = 1.0
        assert np.allclose(R @ u, e, atol=1e-12)


def test_face_lattice_matches_facet_pair_oracle_3d():
    # independent route for 3d: edges are the 1-dimensional common vertex
    # sets of facet pairs, vertices and facets are read off directly
    from itertools import combinations

    for seed in range(6):
        P = random_polytope(3, 8, seed=100 + seed)
        prof = face_lattice(P)
        on = np.abs(P.vertices @ P.normals.T - P.offsets) <= 1e-9  # (V, F)
        edges = set()
        for i, j in combinations(range(P.n_facets), 2):
            common = np.nonzero(on[:, i] & on[:, j])[0]
            if len(common) < 2:
                continue
            pts = P.vertices[common]
            if np.linalg.matrix_rank(pts - pts[0], tol=1e-8) == 1:
                edges.add(frozenset(common))
        assert prof.f_vector == (P.n_vertices, len(edges), P.n_facets)
