"""Shared helpers for the test suite: random bodies, interior sampling, and
the Macbeath-region property checkers used by both the unit tests and the
acceptance suite."""

import numpy as np

from capcover.bodies import PolytopeBody, to_canonical
from capcover.caps import macbeath, make_cap, minimal_cap
from capcover.geometry import Polytope, convex_hull, disjoint


def canonical_cube(d):
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).reshape(d, -1).T
    return to_canonical(PolytopeBody(convex_hull(corners))).body


def canonical_random_polytope(d, n, seed):
    rng = np.random.default_rng(seed)
    K = PolytopeBody(convex_hull(rng.standard_normal((n, d))))
    return to_canonical(K).body


def sample_polytope_points(P: Polytope, n: int, rng) -> np.ndarray:
    """Uniform points in a polytope via its centroid-fan triangulation."""
    c, base, vols, _ = P._simplex_geometry()
    idx = rng.choice(len(vols), size=n, p=vols / vols.sum())
    w = rng.dirichlet(np.ones(P.dim + 1), size=n)
    corners = np.concatenate([base[idx], np.broadcast_to(c, (n, 1, P.dim))], axis=1)
    return np.einsum("nk,nkd->nd", w, corners)


def interior_points_near_boundary(body, depths, dirs):
    """Points at prescribed boundary depths along given directions."""
    from capcover.bodies import point_at_depth

    out = []
    for depth in depths:
        for u in dirs:
            out.append((point_at_depth(body, u, depth), depth))
    return out


# -- Macbeath / cap property checkers ----------------------------------------
# Each returns the number of violating configurations (0 expected).

def check_overlap_containment(P: Polytope, pairs) -> int:
    """If the 1/5-regions of x and y overlap, the 1/5-region of y must lie
    inside the 4/5-region of x."""
    bad = 0
    for x, y in pairs:
        mx = macbeath(P, x, 1.0)
        my = macbeath(P, y, 1.0)
        mx5, my5 = mx.rescaled(0.2), my.rescaled(0.2)
        flag, _ = disjoint(mx5.region, my5.region, want_witness=False)
        if flag:
            continue
        big = mx.rescaled(0.8)
        if not np.all(big.region.contains_many(my5.region.vertices, tol=1e-7)):
            bad += 1
    return bad


def check_cap_absorbs_region(P: Polytope, configs) -> int:
    """A cap meeting the 1/5-region of x absorbs it after 2-expansion."""
    bad = 0
    for x, u, w in configs:
        C = make_cap(P, u, w)
        m = macbeath(P, x, 0.2)
        flag, _ = disjoint(C.polytope, m.region, want_witness=False)
        if flag:
            continue
        # the 2-expansion differs from C only by the cut plane; membership in
        # K holds for the region already, so check the halfspace alone
        cut2 = C.support_value - 2.0 * C.width
        if np.min(m.region.vertices @ C.direction) < cut2 - 1e-9:
            bad += 1
    return bad


def check_cap_inside_scaled_region(P: Polytope, caps, d: int) -> int:
    """A narrow cap lies inside the 3d-scaled region of its base centroid."""
    bad = 0
    for C in caps:
        x = C.base_centroid
        big = macbeath(P, x, 1.0).rescaled(3.0 * d)
        if not np.all(big.region.contains_many(C.polytope.vertices, tol=1e-7)):
            bad += 1
    return bad


def check_minimal_cap_width_band(P: Polytope, points, gamma: float):
    """Minimal-cap width sits in [delta(x), c * delta(x)]; returns
    (violations, empirical c)."""
    body = PolytopeBody(P)
    bad = 0
    c_emp = 0.0
    for x, _ in points:
        C = minimal_cap(P, x, n_grid=512)
        dlt = body.delta(x)
        if C.width < dlt - 1e-9:
            bad += 1
        c_emp = max(c_emp, C.width / dlt)
    if c_emp > 100.0 / gamma:
        bad += 1
    return bad, c_emp


def check_depth_stability(P: Polytope, points, rng, n_samples=200) -> int:
    """Depth varies by at most the fixed band inside the 1/5-region."""
    body = PolytopeBody(P)
    bad = 0
    for x, _ in points:
        m = macbeath(P, x, 0.2)
        dlt = body.delta(x)
        pts = sample_polytope_points(m.region, n_samples, rng)
        for y in pts:
            dy = body.delta(y)
            if not (0.8 * dlt - 1e-9 <= dy <= 4.0 * dlt / 3.0 + 1e-9):
                bad += 1
    return bad
