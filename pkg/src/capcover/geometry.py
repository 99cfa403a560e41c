"""Dimension-generic geometric kernel (2 <= d <= 5).

Convex hulls, halfspace intersections, face lattices, exact volumes and
centroids via simplex decomposition, affine maps, and LP-based separation.
Vertex and facet representations are kept together on :class:`Polytope` and
cross-validated by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import (
    CenterNotInterior,
    DegenerateInput,
    DimensionError,
    Unbounded,
)

# vertex-on-facet tolerance; vertices this close to a hyperplane count as on it
INCIDENCE_TOL = 1e-9
# relative shrink applied before the disjointness LP (closed-set semantics with
# interior-disjoint acceptance)
DISJOINT_SHRINK = 1e-9

MAX_DIM = 5


def check_dim(d: int) -> None:
    if not 2 <= d <= MAX_DIM:
        raise DimensionError(f"dimension {d} outside supported range [2, {MAX_DIM}]")


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace {x : <normal, x> <= offset} with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise ValueError("zero normal")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def value(self, x) -> float:
        """Signed slack offset - <normal, x>; >= 0 inside."""
        return self.offset - float(np.dot(self.normal, x))

    def contains(self, x, tol: float = INCIDENCE_TOL) -> bool:
        return self.value(x) >= -tol


@dataclass(frozen=True)
class AffineMap:
    """Affine map x -> linear @ x + translation with a cached inverse."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.linear, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if abs(np.linalg.det(L)) <= 1e-12:
            raise ValueError("affine map is (near) singular")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "translation", t)

    @cached_property
    def inverse_linear(self) -> np.ndarray:
        return np.linalg.inv(self.linear)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.linear.T + self.translation

    def apply_inverse(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - self.translation) @ self.inverse_linear.T

    def inverse(self) -> "AffineMap":
        return AffineMap(self.inverse_linear, -self.inverse_linear @ self.translation)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """Map equal to applying `other` first, then self."""
        return AffineMap(self.linear @ other.linear,
                         self.linear @ other.translation + self.translation)

    @staticmethod
    def identity(d: int) -> "AffineMap":
        return AffineMap(np.eye(d), np.zeros(d))

    @staticmethod
    def scaling(d: int, factor: float, center=None) -> "AffineMap":
        c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        return AffineMap(factor * np.eye(d), c - factor * c)


@dataclass(frozen=True)
class ComplexityProfile:
    """Face counts per dimension 0..d-1 and their total."""

    f_vector: tuple
    total: int

    @staticmethod
    def from_counts(counts) -> "ComplexityProfile":
        fv = tuple(int(c) for c in counts)
        return ComplexityProfile(fv, int(sum(fv)))


class Polytope:
    """Bounded full-dimensional polytope in dual representation.

    Holds vertices, facet halfspaces, and facet->vertex incidence. Derived
    data (triangulation, edges, volume, centroid, face lattice) is computed
    lazily and cached. Instances are immutable by convention.
    """

    def __init__(self, vertices, normals, offsets, incidence=None, _tri=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.normals = np.asarray(normals, dtype=float)
        self.offsets = np.asarray(offsets, dtype=float)
        self._incidence = incidence  # list of frozenset of vertex indices
        self.dim = self.vertices.shape[1]
        self._tri = _tri
        self._cache = {}

    @property
    def incidence(self) -> list:
        """Facet -> vertex index sets, computed lazily (O(F*V))."""
        if self._incidence is None:
            self._incidence = _incidence(self.vertices, self.normals, self.offsets)
        return self._incidence

    # -- representation ----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_facets(self) -> int:
        return self.normals.shape[0]

    @property
    def facets(self) -> list:
        return [Halfspace(n, b) for n, b in zip(self.normals, self.offsets)]

    def contains(self, x, tol: float = INCIDENCE_TOL) -> bool:
        return bool(np.all(self.normals @ np.asarray(x, float) <= self.offsets + tol))

    def contains_many(self, pts, tol: float = INCIDENCE_TOL) -> np.ndarray:
        P = np.asarray(pts, dtype=float)
        return np.all(P @ self.normals.T <= self.offsets + tol, axis=1)

    def support(self, u) -> float:
        return float(np.max(self.vertices @ np.asarray(u, float)))

    def support_point(self, u) -> np.ndarray:
        vals = self.vertices @ np.asarray(u, float)
        return self.vertices[int(np.argmax(vals))]

    # -- derived geometry --------------------------------------------------

    @property
    def triangulation(self) -> np.ndarray:
        """Facet simplices (index triples into `vertices`) from qhull."""
        if self._tri is None:
            hull = ConvexHull(self.vertices, qhull_options=_qhull_opts(self.dim))
            self._tri = hull.simplices
        return self._tri

    @property
    def edges(self) -> np.ndarray:
        """Superset of 1-faces: all vertex pairs within facet simplices.

        Extra pairs are diagonals of triangulated facets; every pair lies on
        the boundary, which is all slice/cap construction needs.
        """
        if "edges" not in self._cache:
            tri = self.triangulation
            d1 = tri.shape[1]
            pairs = []
            for i in range(d1):
                for j in range(i + 1, d1):
                    pairs.append(tri[:, [i, j]])
            e = np.vstack(pairs)
            e.sort(axis=1)
            self._cache["edges"] = np.unique(e, axis=0)
        return self._cache["edges"]

    def _simplex_geometry(self):
        if "simplexes" not in self._cache:
            c = self.vertices.mean(axis=0)
            tri = self.triangulation
            base = self.vertices[tri]                    # (S, d, d)
            mats = base - c                              # rows: v_i - c
            dets = np.abs(np.linalg.det(mats))
            import math
            vols = dets / math.factorial(self.dim)
            cents = (base.sum(axis=1) + c) / (self.dim + 1)
            self._cache["simplexes"] = (c, base, vols, cents)
        return self._cache["simplexes"]

    @property
    def volume(self) -> float:
        if "volume" not in self._cache:
            _, _, vols, _ = self._simplex_geometry()
            self._cache["volume"] = float(vols.sum())
        return self._cache["volume"]

    @property
    def centroid(self) -> np.ndarray:
        if "centroid" not in self._cache:
            _, _, vols, cents = self._simplex_geometry()
            self._cache["centroid"] = (vols[:, None] * cents).sum(axis=0) / vols.sum()
        return self._cache["centroid"]

    @property
    def circumradius(self) -> float:
        """Max vertex distance from the centroid."""
        if "circum" not in self._cache:
            self._cache["circum"] = float(
                np.max(np.linalg.norm(self.vertices - self.centroid, axis=1)))
        return self._cache["circum"]

    @property
    def inradius_at_centroid(self) -> float:
        if "inrad" not in self._cache:
            c = self.centroid
            self._cache["inrad"] = float(np.min(self.offsets - self.normals @ c))
        return self._cache["inrad"]

    def face_lattice(self) -> ComplexityProfile:
        if "lattice" not in self._cache:
            self._cache["lattice"] = face_lattice(self)
        return self._cache["lattice"]


def _qhull_opts(d: int) -> str:
    return "Qt" if d <= 4 else "Qt Qx"


def convex_hull(points) -> Polytope:
    """Convex hull of full-dimensional points as a :class:`Polytope`.

    Near-coplanar facet planes (within ~1e-7) are merged, and vertices within
    INCIDENCE_TOL of a facet hyperplane count as incident to it.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DegenerateInput("points must be a 2-D array")
    d = pts.shape[1]
    check_dim(d)
    if pts.shape[0] < d + 1:
        raise DegenerateInput(f"need at least {d + 1} points in dimension {d}")
    try:
        hull = ConvexHull(pts, qhull_options=_qhull_opts(d))
    except QhullError as exc:
        raise DegenerateInput(f"qhull failed (degenerate input?): {exc}") from exc
    if hull.volume <= 0:
        raise DegenerateInput("hull is not full-dimensional")

    verts = pts[hull.vertices]
    # map simplices onto the vertex subset
    remap = -np.ones(pts.shape[0], dtype=int)
    remap[hull.vertices] = np.arange(hull.vertices.size)
    tri = remap[hull.simplices]

    eqs = hull.equations  # rows [n, c] meaning n.x + c <= 0
    normals, offsets = _merge_facet_planes(eqs[:, :d], -eqs[:, d])
    return Polytope(verts, normals, offsets, _tri=tri)


def _merge_facet_planes(normals, offsets):
    """Deduplicate coincident facet hyperplanes with a rounding tolerance."""
    key = np.round(np.hstack([normals, offsets[:, None]]), 7)
    _, idx = np.unique(key, axis=0, return_index=True)
    return normals[np.sort(idx)], offsets[np.sort(idx)]


def _incidence(verts, normals, offsets):
    scale = 1.0 + np.abs(offsets)
    slack = offsets[:, None] - normals @ verts.T  # (m, n)
    on = np.abs(slack) <= INCIDENCE_TOL * scale[:, None] * 10
    return [frozenset(np.nonzero(row)[0].tolist()) for row in on]


def halfspace_intersection(halfspaces, interior) -> Polytope:
    """Bounded intersection of halfspaces, via qhull's dual-hull route."""
    c = np.asarray(interior, dtype=float)
    d = c.shape[0]
    check_dim(d)
    if isinstance(halfspaces[0], Halfspace):
        A = np.array([h.normal for h in halfspaces], dtype=float)
        b = np.array([h.offset for h in halfspaces], dtype=float)
    else:
        A, b = halfspaces
        A = np.asarray(A, float)
        b = np.asarray(b, float)
    slack = b - A @ c
    if np.any(slack <= 0):
        raise CenterNotInterior("interior point violates a constraint")
    stacked = np.hstack([A, -b[:, None]])
    try:
        hs = HalfspaceIntersection(stacked, c)
    except QhullError as exc:
        raise Unbounded(f"halfspace intersection failed: {exc}") from exc
    pts = hs.intersections
    if not np.all(np.isfinite(pts)):
        raise Unbounded("halfspace intersection is unbounded")
    return convex_hull(_dedupe_points(pts))


def _dedupe_points(pts, tol=1e-11):
    key = np.round(pts / max(tol, 1e-300), 0)
    _, idx = np.unique(key, axis=0, return_index=True)
    return pts[np.sort(idx)]


def face_lattice(P: Polytope) -> ComplexityProfile:
    """Face counts by closing facet vertex-sets under intersection."""
    facet_sets = set(P.incidence)
    faces = set(facet_sets)
    frontier = set(facet_sets)
    while frontier:
        new = set()
        for f in frontier:
            for g in facet_sets:
                h = f & g
                if h and h not in faces:
                    new.add(h)
        faces |= new
        frontier = new
    counts = [0] * P.dim
    for f in faces:
        k = _affine_rank(P.vertices[sorted(f)])
        if k < P.dim:
            counts[k] += 1
    # vertices always present even if some singleton never arose (shouldn't happen)
    counts[0] = max(counts[0], P.n_vertices)
    return ComplexityProfile.from_counts(counts)


def _affine_rank(pts: np.ndarray) -> int:
    if pts.shape[0] <= 1:
        return 0
    M = pts[1:] - pts[0]
    s = np.linalg.svd(M, compute_uv=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    return int(np.sum(s > 1e-9 * scale))


def volume(P: Polytope) -> float:
    return P.volume


def centroid(P: Polytope) -> np.ndarray:
    return P.centroid


def apply_map(T: AffineMap, P: Polytope) -> Polytope:
    """Image polytope: vertices by T, facet planes by the inverse-transpose rule."""
    verts = T.apply(P.vertices)
    M = T.inverse_linear.T
    normals = P.normals @ M.T
    scale = np.linalg.norm(normals, axis=1)
    normals = normals / scale[:, None]
    offsets = (P.offsets + (P.normals @ T.inverse_linear) @ T.translation) / scale
    return Polytope(verts, normals, offsets, P._incidence, _tri=P._tri)


def disjoint(P: Polytope, Q: Polytope, want_witness: bool = True):
    """Closed-set disjointness via LP feasibility on the combined H-reps.

    Both bodies are shrunk about their centroids by 1 - DISJOINT_SHRINK so
    that facet-touching bodies count as intersecting while interior-disjoint
    packings pass. Returns (flag, separating Halfspace or None).
    """
    # cheap bounding-ball rejections
    gap = np.linalg.norm(P.centroid - Q.centroid)
    if gap > P.circumradius + Q.circumradius + 1e-12:
        return (True, _separating_halfspace(P, Q)) if want_witness else (True, None)
    if P.contains(Q.centroid, tol=-1e-12) or Q.contains(P.centroid, tol=-1e-12):
        return False, None

    A1, b1 = _shrunk_hrep(P)
    A2, b2 = _shrunk_hrep(Q)
    A = np.vstack([A1, A2])
    b = np.concatenate([b1, b2])
    # recentre and rescale so the LP is well conditioned for tiny bodies
    mid = 0.5 * (P.centroid + Q.centroid)
    scale = max(P.circumradius, Q.circumradius, 1e-300)
    b = (b - A @ mid) / scale
    rn = np.linalg.norm(A, axis=1)
    A = A / rn[:, None]
    b = b / rn
    res = linprog(np.zeros(P.dim), A_ub=A, b_ub=b,
                  bounds=[(None, None)] * P.dim, method="highs")
    if res.status not in (0, 2):  # pragma: no cover - solver trouble
        res = linprog(np.zeros(P.dim), A_ub=A, b_ub=b,
                      bounds=[(None, None)] * P.dim, method="highs-ipm")
    if res.status == 0:
        return False, None
    if res.status != 2:  # pragma: no cover - solver trouble
        raise RuntimeError(f"disjointness LP failed with status {res.status}")
    return (True, _separating_halfspace(P, Q)) if want_witness else (True, None)


def _shrunk_hrep(P: Polytope):
    c = P.centroid
    f = 1.0 - DISJOINT_SHRINK
    # facet {n.x <= b} scaled by f about c: n.x <= f*b + (1-f)*n.c
    return P.normals, f * P.offsets + (1 - f) * (P.normals @ c)


def _separating_halfspace(P: Polytope, Q: Polytope):
    """Max-margin separating halfspace between two disjoint vertex sets."""
    d = P.dim
    V, W = P.vertices, Q.vertices
    # variables (u, b, s): maximize s with u.v <= b - s, u.w >= b + s, |u| <= 1
    nv, nw = V.shape[0], W.shape[0]
    A = np.zeros((nv + nw, d + 2))
    A[:nv, :d] = V
    A[:nv, d] = -1.0
    A[:nv, d + 1] = 1.0
    A[nv:, :d] = -W
    A[nv:, d] = 1.0
    A[nv:, d + 1] = 1.0
    cvec = np.zeros(d + 2)
    cvec[d + 1] = -1.0
    bounds = [(-1, 1)] * d + [(None, None), (0, None)]
    res = linprog(cvec, A_ub=A, b_ub=np.zeros(nv + nw), bounds=bounds, method="highs")
    if res.status != 0 or res.x is None:
        return None
    u, b = res.x[:d], res.x[d]
    nrm = np.linalg.norm(u)
    if nrm < 1e-12:
        return None
    return Halfspace(u / nrm, b / nrm)


# -- fast cap volumes via the simplex/halfspace formula ----------------------

def _simplex_fraction(values) -> float:
    """Fraction of a simplex's volume where a linear function is >= 0.

    `values` are the function values at the d+1 vertices (Varsi's recurrence).
    """
    pos = [v for v in values if v > 0.0]
    neg = [v for v in values if v <= 0.0]
    if not pos:
        return 0.0
    if not neg:
        return 1.0
    K = len(neg)
    A = [1.0] + [0.0] * K
    for p in pos:
        for k in range(1, K + 1):
            A[k] = (p * A[k - 1] - neg[k - 1] * A[k]) / (p - neg[k - 1])
    return A[K]


def _simplex_fractions(vals: np.ndarray) -> np.ndarray:
    """Row-wise Varsi recurrence for straddling simplices.

    Rows are value vectors with at least one positive and one nonpositive
    entry; the fraction is order-independent, so entries are regrouped by
    sign and rows with equal negative counts are processed together.
    """
    m, n = vals.shape
    out = np.empty(m)
    kcounts = (vals <= 0.0).sum(axis=1)
    for k in np.unique(kcounts):
        rows = np.nonzero(kcounts == k)[0]
        sub = vals[rows]
        neg = sub[sub <= 0.0].reshape(len(rows), k)
        pos = sub[sub > 0.0].reshape(len(rows), n - k)
        A = np.zeros((len(rows), k + 1))
        A[:, 0] = 1.0
        for j in range(n - k):
            p = pos[:, j]
            for kk in range(1, k + 1):
                A[:, kk] = (p * A[:, kk - 1] - neg[:, kk - 1] * A[:, kk]) / (p - neg[:, kk - 1])
        out[rows] = A[:, k]
    return out


def _facet_balls(P: Polytope):
    """Bounding balls of the boundary-facet parts of the fan simplices."""
    if "facet_balls" not in P._cache:
        _, base, _, _ = P._simplex_geometry()
        mids = base.mean(axis=1)
        r = np.linalg.norm(base - mids[:, None, :], axis=2).max(axis=1)
        P._cache["facet_balls"] = (mids, r)
    return P._cache["facet_balls"]


def cap_volume(P: Polytope, u, offset: float) -> float:
    """Volume of P ∩ {x : <u, x> >= offset}, exact per simplex.

    When the cut plane sits above the fan center, only simplices whose
    boundary facet reaches the plane can contribute, which makes small caps
    of finely triangulated bodies cheap.
    """
    u = np.asarray(u, dtype=float)
    c, base, vols, _ = P._simplex_geometry()
    val_c = float(c @ u - offset)
    if val_c < 0:
        mids, rad = _facet_balls(P)
        cand = np.nonzero(mids @ u + rad >= offset)[0]
        if cand.size == 0:
            return 0.0
        base = base[cand]
        vols = vols[cand]
    vals_base = base @ u - offset                    # (S, d)
    vals = np.concatenate(
        [vals_base, np.full((vals_base.shape[0], 1), val_c)], axis=1)
    mins = vals.min(axis=1)
    maxs = vals.max(axis=1)
    total = float(vols[mins > 0].sum())
    mixed = np.nonzero((mins <= 0) & (maxs > 0))[0]
    if mixed.size:
        total += float(np.sum(vols[mixed] * _simplex_fractions(vals[mixed])))
    return total


def slice_points(P: Polytope, u, offset: float, tol: float = 1e-12) -> np.ndarray:
    """Boundary points of the slice P ∩ {<u, x> = offset}.

    Vertices on the hyperplane plus boundary-edge crossings; their hull is
    the slice. Empty array if the hyperplane misses P.
    """
    u = np.asarray(u, dtype=float)
    vals = P.vertices @ u - offset
    on = np.abs(vals) <= tol
    pts = [P.vertices[on]] if np.any(on) else []
    e = P.edges
    va, vb = vals[e[:, 0]], vals[e[:, 1]]
    cross = (va > tol) & (vb < -tol) | (va < -tol) & (vb > tol)
    if np.any(cross):
        a = P.vertices[e[cross, 0]]
        b = P.vertices[e[cross, 1]]
        t = (va[cross] / (va[cross] - vb[cross]))[:, None]
        pts.append(a + t * (b - a))
    if not pts:
        return np.empty((0, P.dim))
    return np.vstack(pts)


def orthonormal_frame(u) -> np.ndarray:
    """Rotation matrix R (rows orthonormal) with R @ u = e_d, deterministic.

    Built from a Householder reflection so repeated calls are bit-identical.
    """
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    d = u.shape[0]
    e = np.zeros(d)
    e[-1] = 1.0
    v = u - e
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        return np.eye(d)
    v = v / nv
    H = np.eye(d) - 2.0 * np.outer(v, v)  # H @ u = e, H symmetric orthogonal
    return H


def flat_coordinates(points: np.ndarray, origin, frame: np.ndarray) -> np.ndarray:
    """Coordinates of hyperplane points in the first d-1 axes of `frame`."""
    rel = np.asarray(points, float) - np.asarray(origin, float)
    return rel @ frame.T[:, :-1]


def slice_polytope(P: Polytope, u, offset: float):
    """The slice P ∩ {<u,x> = offset} as ((d-1)-coords hull, origin, frame).

    Returns (vertices_in_flat_coords, origin_point, frame) or None when the
    slice is empty / lower-dimensional. For d == 2 the flat hull is the pair
    of segment endpoints.
    """
    pts = slice_points(P, u, offset)
    if pts.shape[0] < P.dim:
        return None
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    origin = u * offset
    R = orthonormal_frame(u)
    flat = flat_coordinates(pts, origin, R)
    if P.dim == 2:
        lo, hi = float(flat.min()), float(flat.max())
        if hi - lo < 1e-14:
            return None
        return np.array([[lo], [hi]]), origin, R
    try:
        hull = ConvexHull(flat)
    except QhullError:
        return None
    return flat[hull.vertices], origin, R


def flat_centroid_area(flat_vertices: np.ndarray):
    """Centroid and measure of a (d-1)-polytope given in flat coordinates."""
    k = flat_vertices.shape[1]
    if k == 1:
        lo = float(flat_vertices.min())
        hi = float(flat_vertices.max())
        return np.array([(lo + hi) / 2.0]), hi - lo
    hull = ConvexHull(flat_vertices)
    c0 = flat_vertices[hull.vertices].mean(axis=0)
    import math
    total = 0.0
    acc = np.zeros(k)
    for simp in hull.simplices:
        M = flat_vertices[simp] - c0
        v = abs(np.linalg.det(M)) / math.factorial(k)
        total += v
        acc += v * (flat_vertices[simp].sum(axis=0) + c0) / (k + 1)
    return acc / total, total


def unflatten(flat_pts: np.ndarray, origin, frame: np.ndarray) -> np.ndarray:
    """Inverse of :func:`flat_coordinates` for points on the hyperplane."""
    k = flat_pts.shape[1]
    lifted = np.hstack([flat_pts, np.zeros((flat_pts.shape[0], 1))])
    return lifted @ frame + np.asarray(origin, float)
