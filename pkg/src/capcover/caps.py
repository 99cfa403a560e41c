"""Caps, rho-expansions, Macbeath regions, minimal caps, and the greedy
boundary packing with volume histograms.

All exact slicing and intersection work runs on polytopes; analytic bodies
are replaced at entry by a fine inner polytopal proxy (hull of support
points), whose resolution is tied to the working epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import geometry
from .bodies import ConvexBody, PolytopeBody, Box, point_at_depth
from .errors import (
    BoundaryPoint,
    EpsilonTooLarge,
    GeometryInvalid,
    Unbounded,
    WidthTooLarge,
)
from .geometry import (
    Polytope,
    cap_volume,
    convex_hull,
    flat_centroid_area,
    halfspace_intersection,
    orthonormal_frame,
    slice_points,
)
from .sampling import unit_directions

PROXY_CAP = 200_000


def polytopal_proxy(K: ConvexBody, eps: float, max_points: int = PROXY_CAP) -> PolytopeBody:
    """Inner polytopal stand-in for a body, fine enough for scale eps work.

    Point count follows 64 * (10/eps)^((d-1)/2) so that the proxy's Hausdorff
    defect is well below eps for round bodies; polytopes pass through as-is.
    """
    if isinstance(K, PolytopeBody):
        return K
    if isinstance(K, Box):
        return PolytopeBody(K.as_polytope())
    d = K.dim
    n = int(min(max_points, math.ceil(64.0 * (10.0 / eps) ** ((d - 1) / 2.0))))
    dirs = unit_directions(d, max(n, 8 * d))
    pts = np.array([K.support(u)[1] for u in dirs])
    return PolytopeBody(convex_hull(geometry._dedupe_points(pts)))


def _as_polytope(K) -> Polytope:
    if isinstance(K, Polytope):
        return K
    if isinstance(K, PolytopeBody):
        return K.polytope
    if isinstance(K, Box):
        return K.as_polytope()
    raise GeometryInvalid(
        f"{type(K).__name__} must be wrapped by polytopal_proxy() first")


class Cap:
    """Cap {x in K : <u, x> >= h - w} of a polytope K, with lazy geometry."""

    def __init__(self, P: Polytope, u, width: float):
        self.body_polytope = P
        u = np.asarray(u, dtype=float)
        self.direction = u / np.linalg.norm(u)
        self.support_value = P.support(self.direction)
        self.width = float(width)
        if self.width <= 0:
            raise WidthTooLarge("cap width must be positive")

    @property
    def cut_offset(self) -> float:
        return self.support_value - self.width

    @property
    def full_width(self) -> float:
        u = self.direction
        return self.support_value + self.body_polytope.support(-u)

    @cached_property
    def apex(self) -> np.ndarray:
        return self.body_polytope.support_point(self.direction)

    @cached_property
    def volume(self) -> float:
        return cap_volume(self.body_polytope, self.direction, self.cut_offset)

    @cached_property
    def polytope(self) -> Polytope:
        P = self.body_polytope
        vals = P.vertices @ self.direction - self.cut_offset
        above = P.vertices[vals >= -1e-13]
        ring = slice_points(P, self.direction, self.cut_offset)
        pts = np.vstack([above, ring]) if ring.size else above
        return convex_hull(geometry._dedupe_points(pts))

    @cached_property
    def _base(self):
        pts = slice_points(self.body_polytope, self.direction, self.cut_offset)
        if pts.shape[0] < self.body_polytope.dim:
            raise GeometryInvalid("cap base is degenerate")
        u = self.direction
        origin = u * self.cut_offset
        R = orthonormal_frame(u)
        flat = geometry.flat_coordinates(pts, origin, R)
        c, area = flat_centroid_area(flat)
        centroid = geometry.unflatten(c[None, :], origin, R)[0]
        return flat, origin, R, centroid, area

    @property
    def base_flat(self) -> np.ndarray:
        return self._base[0]

    @property
    def base_frame(self):
        return self._base[1], self._base[2]

    @cached_property
    def base_centroid(self) -> np.ndarray:
        return self._base[3]

    @property
    def base_area(self) -> float:
        return self._base[4]


def make_cap(K, u, w: float) -> Cap:
    """The unique cap of width w whose base is orthogonal to u."""
    P = _as_polytope(K)
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    full = P.support(u) + P.support(-u)
    if not 0 < w < full:
        raise WidthTooLarge(f"width {w} outside (0, {full})")
    return Cap(P, u, w)


def expand_cap(C: Cap, rho: float) -> Cap:
    """rho-expansion: same base normal, cutting plane at rho times the
    distance from the supporting hyperplane; clamps to the whole body."""
    if rho < 0:
        raise GeometryInvalid("rho must be >= 0")
    w = min(rho * C.width, C.full_width)
    return Cap(C.body_polytope, C.direction, w)


@dataclass(frozen=True)
class MacbeathRegion:
    """Scaled Macbeath region: center x, scale lam, realized polytope."""

    center: np.ndarray
    scale: float
    region: Polytope
    depth: float

    @property
    def volume(self) -> float:
        return self.region.volume

    @property
    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.region.vertices - self.center, axis=1)))

    def rescaled(self, new_scale: float) -> "MacbeathRegion":
        f = new_scale / self.scale
        R = self.region
        verts = self.center + f * (R.vertices - self.center)
        offsets = f * R.offsets + (1 - f) * (R.normals @ self.center)
        poly = Polytope(verts, R.normals, offsets, R._incidence, _tri=R._tri)
        return MacbeathRegion(self.center, new_scale, poly, self.depth)


def _filtered_intersection(A, b, x, start: int = 80):
    """Bounded intersection of many halfspaces around interior x, keeping
    only locally relevant constraints (verified, so the result is exact)."""
    slack = b - A @ x
    if np.min(slack) <= 0:
        raise GeometryInvalid("point not strictly interior")
    m = A.shape[0]
    k = min(m, max(start, 12 * A.shape[1]))
    order = np.argsort(slack) if k >= m else None
    sel = np.zeros(m, dtype=bool)
    if order is None:
        sel[np.argpartition(slack, k - 1)[:k]] = True
    else:
        sel[order[:k]] = True
    # normals are unit, so a constraint with slack beyond the current result's
    # radius around x cannot be violated and needs no verification
    norms = np.linalg.norm(A, axis=1)
    for _ in range(40):
        try:
            poly = halfspace_intersection((A[sel], b[sel]), x)
        except Unbounded:
            k = min(m, 4 * k)
            if order is None:
                order = np.argsort(slack)
            sel[order[:k]] = True
            if np.all(sel) and k >= m:
                raise
            continue
        r_poly = float(np.max(np.linalg.norm(poly.vertices - x, axis=1)))
        check = np.nonzero(~sel & (slack <= r_poly * norms + 1e-12))[0]
        if check.size == 0:
            return poly
        viol = poly.vertices @ A[check].T > b[check] + 1e-12
        bad = np.any(viol, axis=0)
        if not np.any(bad):
            return poly
        sel[check[bad]] = True
    raise GeometryInvalid("filtered halfspace intersection did not settle")


def macbeath(K, x, lam: float = 1.0) -> MacbeathRegion:
    """Macbeath region x + lam * ((K - x) ∩ (x - K)) as an exact polytope."""
    P = _as_polytope(K)
    x = np.asarray(x, dtype=float)
    if not 0 < lam <= 1:
        raise GeometryInvalid("scale must lie in (0, 1]")
    depth = float(np.min(P.offsets - P.normals @ x))
    if depth < 1e-9:
        raise BoundaryPoint("Macbeath center is on the boundary")
    A = np.vstack([P.normals, -P.normals])
    b = np.concatenate([P.offsets, P.offsets - 2.0 * (P.normals @ x)])
    m1 = _filtered_intersection(A, b, x)
    region = MacbeathRegion(x, 1.0, m1, depth)
    return region if lam == 1.0 else region.rescaled(lam)


def minimal_cap(K, x, n_grid: int = None, refine: bool = True) -> Cap:
    """Minimum-volume cap whose base passes through x.

    Coarse sweep over a deterministic direction lattice, then simplex
    refinement on the sphere chart; grid order breaks ties.
    """
    P = _as_polytope(K)
    x = np.asarray(x, dtype=float)
    d = P.dim
    if n_grid is None:
        n_grid = 2048 if d <= 3 else 10_000
    dirs = unit_directions(d, n_grid)
    vols = np.array([cap_volume(P, u, float(u @ x)) for u in dirs])
    vmin = float(np.min(vols))
    ties = np.nonzero(vols <= vmin * (1.0 + 1e-9) + 1e-15)[0]
    if len(ties) > 1:
        # flat valleys are common (e.g. chords pivoting inside a slab); the
        # true minimal cap has x at its base centroid, so prefer that, then
        # fall back to lexicographic order for full determinism
        def tie_key(i):
            u = dirs[i]
            w = P.support(u) - float(u @ x)
            try:
                c = Cap(P, u, w).base_centroid
            except (GeometryInvalid, WidthTooLarge):
                c = x
            return (round(w, 9), round(float(np.linalg.norm(c - x)), 9), tuple(u))

        i0 = int(min(ties, key=tie_key))
    else:
        i0 = int(ties[0])
    u0 = dirs[i0]
    if refine:
        R = orthonormal_frame(u0)

        def from_chart(s):
            w = R.T @ np.concatenate([s, [1.0]])
            return w / np.linalg.norm(w)

        def f(s):
            u = from_chart(s)
            return cap_volume(P, u, float(u @ x))

        res = minimize(f, np.zeros(d - 1), method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 0.0, "maxiter": 300})
        # minima are often non-unique (flat valleys); keep the grid winner
        # unless refinement is strictly better, for deterministic ties
        if res.fun < vols[i0] * (1.0 - 1e-7):
            u0 = from_chart(res.x)
    width = P.support(u0) - float(u0 @ x)
    return Cap(P, u0, width)


@dataclass
class PackingEntry:
    center: np.ndarray
    depth: float
    direction: np.ndarray
    region_small: MacbeathRegion      # scale 1/20
    region_expanded: MacbeathRegion   # 4-factor expansion, scale 1/5
    volume_m1: float                  # scale-1 Macbeath volume (exact rescale)
    volume_class: int


@dataclass
class Packing:
    body_polytope: Polytope
    epsilon: float
    seed: int
    n_dirs: int
    entries: list
    coverage: float

    def to_records(self) -> list:
        return [
            {
                "center": e.center.tolist(),
                "depth": e.depth,
                "direction": e.direction.tolist(),
                "volume": e.volume_m1,
                "class": e.volume_class,
                "accepted": True,
            }
            for e in self.entries
        ]


def volume_class(vol: float, eps: float, d: int) -> int:
    """Dyadic volume type j with v_j = 2^j * eps^((d+1)/2)."""
    if vol <= 0:
        raise GeometryInvalid("volume must be positive")
    return int(math.floor(math.log2(vol / eps ** ((d + 1) / 2.0))))


def _pairwise_disjoint_ok(cand: MacbeathRegion, accepted, centers, radii) -> bool:
    if not accepted:
        return True
    c = cand.center
    r = cand.radius
    dist = np.linalg.norm(centers - c, axis=1)
    near = np.nonzero(dist <= r + radii + 1e-12)[0]
    for i in near:
        other = accepted[i]
        # cheap certain-overlap tests before the LP
        if other.region.contains(c) or cand.region.contains(other.center):
            return False
        if np.any(other.region.contains_many(cand.region.vertices)):
            return False
        if np.any(cand.region.contains_many(other.region.vertices)):
            return False
        flag, _ = geometry.disjoint(cand.region, other.region, want_witness=False)
        if not flag:
            return False
    return True


def boundary_packing(K, eps: float, seed: int = 0, n_dirs: int = 2048) -> Packing:
    """Greedy maximal-ish packing of scale-1/20 Macbeath regions at boundary
    depth eps, with their 4-factor expansions and a ray-coverage statistic."""
    P = _as_polytope(K)
    body = PolytopeBody(P)
    d = P.dim
    inradius = float(np.min(P.offsets))
    if eps >= inradius / 4.0:
        raise EpsilonTooLarge(f"eps {eps} >= inradius/4 = {inradius / 4.0}")
    dirs = unit_directions(d, n_dirs, seed=seed)

    accepted = []
    entries = []
    centers = np.empty((0, d))
    radii = np.empty(0)
    for u in dirs:
        x = point_at_depth(body, u, eps)
        small = macbeath(P, x, 1.0 / 20.0)
        if not _pairwise_disjoint_ok(small, accepted, centers, radii):
            continue
        accepted.append(small)
        centers = np.vstack([centers, x])
        radii = np.append(radii, small.radius)
        vol_m1 = small.volume * 20.0**d
        entries.append(PackingEntry(
            center=x, depth=eps, direction=u,
            region_small=small,
            region_expanded=small.rescaled(4.0 / 20.0),
            volume_m1=vol_m1,
            volume_class=volume_class(vol_m1, eps, d),
        ))

    coverage = _ray_coverage(entries, d, seed)
    return Packing(P, eps, seed, n_dirs, entries, coverage)


def _ray_coverage(entries, d: int, seed: int, n_rays: int = 10_000) -> float:
    if not entries:
        return 0.0
    rng = np.random.default_rng([seed, 0xC0FFEE])
    g = rng.standard_normal((n_rays, d))
    rays = g / np.linalg.norm(g, axis=1, keepdims=True)
    hit = np.zeros(n_rays, dtype=bool)
    for e in entries:
        R = e.region_expanded.region
        C = R.normals @ rays.T            # (F, n)
        with np.errstate(divide="ignore"):
            ratio = R.offsets[:, None] / C
        lo = np.where(C < 0, ratio, -np.inf).max(axis=0)
        hi = np.where(C > 0, ratio, np.inf).min(axis=0)
        feasible = (lo <= hi + 1e-12) & (hi >= 0)
        zero_rows_bad = np.any((np.abs(C) < 1e-15) & (R.offsets[:, None] < 0), axis=0)
        hit |= feasible & ~zero_rows_bad
        if np.all(hit):
            break
    return float(np.mean(hit))


def volume_histogram(pack: Packing, eps: float = None) -> dict:
    """Counts of packing entries per dyadic volume class."""
    eps = pack.epsilon if eps is None else eps
    d = pack.body_polytope.dim
    out = {}
    for e in pack.entries:
        j = volume_class(e.volume_m1, eps, d)
        out[j] = out.get(j, 0) + 1
    return out
