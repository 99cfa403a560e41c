"""Polar bodies, point/hyperplane polarity, Mahler volumes, and the map
sending a cap of a canonical body to a cap of its polar.

Also contains the flat dual-cap construction: the polar of the set of
hyperplanes through an apex point that miss a (d-1)-dimensional body, and
its closed-form identity against the scaled polar of the body's projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import PolytopeBody, point_at_depth
from .caps import Cap, _as_polytope, make_cap, minimal_cap
from .errors import CenterNotInterior, GeometryInvalid, OriginPolar
from .geometry import (
    Halfspace,
    Polytope,
    convex_hull,
    flat_coordinates,
    halfspace_intersection,
    orthonormal_frame,
)

PI_DEPTH_CONSTANT = 8.0


@dataclass(frozen=True)
class PolarPair:
    """Polytope and its polar about a chosen interior center.

    Both bodies live in coordinates where the center is the origin.
    """

    primal: Polytope
    polar: Polytope
    center: np.ndarray


def polar_body(P: Polytope, center=None) -> PolarPair:
    """Polar {u : <u, v> <= 1 for all v in P - center} as a polytope."""
    center = P.centroid if center is None else np.asarray(center, dtype=float)
    slack = P.offsets - P.normals @ center
    if np.min(slack) <= 1e-12:
        raise CenterNotInterior("polar center must be strictly interior")
    prim = Polytope(P.vertices - center, P.normals,
                    P.offsets - P.normals @ center, P._incidence, _tri=P._tri)
    # facets become vertices (normal / slack); the hull rebuild recovers the
    # polar's own facets, which correspond to the primal vertices
    pol = convex_hull(prim.normals / prim.offsets[:, None])
    return PolarPair(prim, pol, center)


def polar_point(v) -> Halfspace:
    """Hyperplane {x : <v, x> <= 1} of a nonzero point, as a halfspace."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise OriginPolar("polar of the origin is undefined")
    return Halfspace(v / n, 1.0 / n)


def polar_hyperplane(h: Halfspace) -> np.ndarray:
    """Point whose polar hyperplane is the boundary of h."""
    if abs(h.offset) < 1e-14:
        raise OriginPolar("hyperplane through the origin has no polar point")
    return h.normal / h.offset


def mahler(P: Polytope) -> float:
    """vol(P) * vol(P polar about its centroid), an affine invariant."""
    pair = polar_body(P, P.centroid)
    return pair.primal.volume * pair.polar.volume


def pi_map(K, C: Cap, c: float = PI_DEPTH_CONSTANT) -> Cap:
    """Cap of the polar body associated with a cap of a canonical body.

    Walk along C's base normal inside the polar to the point at boundary
    depth width/c, and take that point's minimal cap there.
    """
    P = _as_polytope(K)
    pair = polar_body(P, np.zeros(P.dim))
    x = point_at_depth(PolytopeBody(pair.polar), C.direction, C.width / c)
    return minimal_cap(pair.polar, x)


def mahler_cap_product(K, u, eps: float, c: float = PI_DEPTH_CONSTANT) -> float:
    """vol(cap) * vol(polar-mapped cap) for a width-eps cap along u."""
    P = _as_polytope(K)
    C = make_cap(P, u, eps)
    return C.volume * pi_map(P, C, c).volume


@dataclass(frozen=True)
class DualCapPolar:
    """Polar of a dual cap, with the scaled-polar identity data.

    All flat bodies are (d-1)-dimensional vertex arrays in the horizontal
    frame of the apex direction.
    """

    apex: np.ndarray
    alpha: float
    h_star_flat: np.ndarray
    g_flat: np.ndarray
    scaled_polar_flat: np.ndarray
    frame: np.ndarray

    @property
    def max_vertex_mismatch(self) -> float:
        return _vertex_set_distance(self.g_flat - self.h_star_flat,
                                    self.scaled_polar_flat)


def _vertex_set_distance(A: np.ndarray, B: np.ndarray) -> float:
    if A.shape[0] != B.shape[0]:
        return float("inf")
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return max(float(np.max(np.min(D, axis=1))), float(np.max(np.min(D, axis=0))))


def _flat_hull(pts: np.ndarray) -> np.ndarray:
    """Extreme points of a point set in k dims (k = 1 means an interval)."""
    if pts.shape[1] == 1:
        return np.array([[float(pts.min())], [float(pts.max())]])
    return convex_hull(pts).vertices


def _interval_intersection(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bounded solution set of one-dimensional constraints a*w <= b."""
    lo, hi = -np.inf, np.inf
    for a, bb in zip(A[:, 0], b):
        if a > 1e-14:
            hi = min(hi, bb / a)
        elif a < -1e-14:
            lo = max(lo, bb / a)
        elif bb < -1e-12:
            raise GeometryInvalid("infeasible flat constraint")
    if not np.isfinite(lo) or not np.isfinite(hi) or lo > hi:
        raise GeometryInvalid("flat constraint set is unbounded or empty")
    return np.array([[lo], [hi]])


def _bounded_hsi(A: np.ndarray, b: np.ndarray, interior: np.ndarray) -> np.ndarray:
    if A.shape[1] == 1:
        return _interval_intersection(A, b)
    return halfspace_intersection((A, b), interior).vertices


def dual_cap_polar(flat_body_points: np.ndarray, z, x) -> DualCapPolar:
    """Polar of the dual cap of a flat body seen from apex z.

    `flat_body_points` are d-dimensional points spanning a (d-1)-dimensional
    convex body on a hyperplane missing the origin; z lies on the ray from
    the origin through x, beyond the body. The result records both sides of
    the identity: (G - h*) equals alpha times the polar of the body's
    projection along z, with alpha = |x - z| / |z|.
    """
    pts = np.asarray(flat_body_points, dtype=float)
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    d = z.shape[0]
    zeta = float(np.linalg.norm(z))
    if zeta < 1e-12:
        raise GeometryInvalid("apex at the origin")
    v = z / zeta
    R = orthonormal_frame(v)                       # R @ v = e_d
    origin = np.zeros(d)
    flat = flat_coordinates(pts, origin, R)        # horizontal parts
    heights = pts @ v
    alpha = float(np.linalg.norm(x - z)) / zeta
    if not 0.0 < alpha < 1.0:
        raise GeometryInvalid("apex must lie beyond the body on the ray")

    # x must be relatively interior to the body: its projection (the flat
    # origin) needs positive slack against the projected hull
    proj_hull = _flat_hull(flat)
    if proj_hull.shape[1] == 1:
        if not proj_hull.min() < -1e-10 < 1e-10 < proj_hull.max():
            raise GeometryInvalid("ray point not interior to the flat body")
    else:
        H = convex_hull(flat)
        if np.min(H.offsets) <= 1e-10:
            raise GeometryInvalid("ray point not interior to the flat body")

    # body hyperplane normal u and the polar point of the parallel plane
    # through z, written in the horizontal frame
    u = _hyperplane_normal(pts)
    uz = float(u @ z)
    if abs(uz) < 1e-12:
        raise GeometryInvalid("apex lies on the body's hyperplane")
    h_star = u / uz
    h_star_flat = (R @ h_star)[:-1]

    # G on the hyperplane {<w, z> = 1}: horizontal coordinates w satisfy
    # <w, p_flat> <= 1 - p_height / zeta for every vertex p of the body
    A = flat
    b = 1.0 - heights / zeta
    g_flat = _flat_hull(_bounded_hsi(A, b, h_star_flat))

    # right-hand side: alpha times the polar of the projected body
    polar_pts = _bounded_hsi(proj_hull, np.ones(proj_hull.shape[0]),
                             np.zeros(d - 1))
    scaled = _flat_hull(alpha * polar_pts)

    return DualCapPolar(z, alpha, h_star_flat, g_flat, scaled, R)


def _hyperplane_normal(pts: np.ndarray) -> np.ndarray:
    """Unit normal of the affine hull of points spanning a hyperplane,
    oriented away from the origin."""
    c = pts.mean(axis=0)
    rel = pts - c
    _, s, Vt = np.linalg.svd(rel)
    n = Vt[-1]
    if float(n @ c) < 0:
        n = -n
    off = float(n @ c)
    if abs(off) < 1e-12:
        raise GeometryInvalid("flat body's hyperplane passes through the origin")
    return n
