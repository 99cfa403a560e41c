"""Convex body oracles, analytic test bodies, John ellipsoids, and the
reduction to canonical (ball-sandwiched) position.

Every body answers membership, support, and boundary-ray queries; analytic
variants use closed forms, polytopes use their H/V representations, and
affine images fall back to support-based formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from . import geometry
from .errors import (
    DepthTooLarge,
    GeometryInvalid,
    NotConverged,
    OriginQuery,
    OutsideBody,
)
from .geometry import AffineMap, Polytope, check_dim
from .sampling import unit_directions

MEMBERSHIP_TOL = 1e-9
BISECTION_ITERS = 80

# width-assumption threshold for the small-cap lemmas; the theory only asks
# for "sufficiently small", this is the configurable artifact default
DELTA0 = 0.1


@dataclass(frozen=True)
class Ellipsoid:
    """{x : (x - center)^T shape (x - center) <= 1} with shape SPD."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        A = np.asarray(self.shape, dtype=float)
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise GeometryInvalid("ellipsoid shape matrix not symmetric")
        A = 0.5 * (A + A.T)
        if np.min(np.linalg.eigvalsh(A)) <= 0:
            raise GeometryInvalid("ellipsoid shape matrix not positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", A)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def scaled(self, factor: float) -> "Ellipsoid":
        return Ellipsoid(self.center, self.shape / factor**2)

    def volume(self) -> float:
        d = self.dim
        kappa = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        return kappa / math.sqrt(np.linalg.det(self.shape))

    def as_body(self) -> "EllipsoidBody":
        return EllipsoidBody(self.center, self.shape)


class ConvexBody:
    """Membership / support / boundary-ray oracle over a convex body."""

    dim: int

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def support(self, u):
        """Returns (support value h(u), a point attaining it)."""
        raise NotImplementedError

    def support_value(self, u) -> float:
        return self.support(u)[0]

    def boundary_ray(self, x0, u) -> np.ndarray:
        """Boundary point along the ray x0 + t*u (x0 interior, u unit)."""
        x0 = np.asarray(x0, dtype=float)
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        hi = self.support_value(u) - float(u @ x0) + 1e-6
        lo = 0.0
        if not self.contains(x0):
            raise OutsideBody("ray origin not inside the body")
        for _ in range(BISECTION_ITERS):
            mid = 0.5 * (lo + hi)
            if self.contains(x0 + mid * u, tol=0.0):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        return x0 + lo * u

    def delta(self, x) -> float:
        """Distance from an interior point to the boundary."""
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise OutsideBody("delta() queried outside the body")
        return self._delta_interior(x)

    def _delta_interior(self, x) -> float:
        # generic: delta(x) = min over unit u of h(u) - <u, x>
        return _delta_by_support(self, x)

    def support_batch(self, dirs: np.ndarray) -> np.ndarray:
        return np.array([self.support_value(u) for u in dirs])


def _delta_by_support(K: ConvexBody, x, n_coarse: int = 128):
    dirs = unit_directions(K.dim, n_coarse)
    vals = K.support_batch(dirs) - dirs @ x

    def f(w):
        nw = np.linalg.norm(w)
        u = w / nw
        return (K.support_value(u) - float(u @ x))

    best = None
    order = np.argsort(vals)
    for idx in order[:3]:
        res = minimize(lambda w: f(w), dirs[idx], method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 400})
        v = res.fun
        best = v if best is None else min(best, v)
    return max(0.0, float(best))


class Ball(ConvexBody):
    def __init__(self, radius: float, center=None, dim: int = None):
        if center is None:
            center = np.zeros(dim if dim is not None else 2)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.dim = self.center.shape[0]
        check_dim(self.dim)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return np.linalg.norm(np.asarray(x, float) - self.center) <= self.radius + tol

    def support(self, u):
        u = np.asarray(u, dtype=float)
        p = self.center + self.radius * u / np.linalg.norm(u)
        return float(u @ p), p

    def support_value(self, u):
        u = np.asarray(u, dtype=float)
        return float(u @ self.center) + self.radius * float(np.linalg.norm(u))

    def support_batch(self, dirs):
        return dirs @ self.center + self.radius

    def _delta_interior(self, x):
        return self.radius - float(np.linalg.norm(np.asarray(x, float) - self.center))


class EllipsoidBody(ConvexBody):
    def __init__(self, center, shape):
        self.ell = Ellipsoid(center, shape)
        self.center = self.ell.center
        self.shape = self.ell.shape
        self.dim = self.center.shape[0]
        check_dim(self.dim)
        self._inv = np.linalg.inv(self.shape)
        self._evals, self._evecs = np.linalg.eigh(self.shape)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        r = np.asarray(x, float) - self.center
        q = float(r @ self.shape @ r)
        # tolerance in distance units, not quadratic-form units
        return q <= 1.0 + 2.0 * tol * math.sqrt(max(q, 1e-30) * np.max(self._evals))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        Au = self._inv @ u
        s = math.sqrt(float(u @ Au))
        p = self.center + Au / s
        return float(u @ p), p

    def support_value(self, u):
        u = np.asarray(u, dtype=float)
        return float(u @ self.center) + math.sqrt(float(u @ self._inv @ u))

    def support_batch(self, dirs):
        return dirs @ self.center + np.sqrt(np.einsum("id,de,ie->i", dirs, self._inv, dirs))

    def _delta_interior(self, x):
        # closest boundary point via the Lagrange scalar equation in eigenbasis
        xp = self._evecs.T @ (np.asarray(x, float) - self.center)
        lam = self._evals
        q0 = float(np.sum(lam * xp**2))
        if q0 >= 1.0:
            return 0.0
        if np.linalg.norm(xp) < 1e-15:
            return 1.0 / math.sqrt(float(np.max(lam)))

        def phi(mu):
            return float(np.sum(lam * xp**2 / (1.0 + mu * lam) ** 2)) - 1.0

        # pole sits at -1/lambda for the largest eigenvalue with nonzero
        # component; phi -> +inf there and phi(0) = q0 - 1 < 0
        active = np.abs(xp) > 1e-15
        mu_star = -1.0 / float(np.max(lam[active]))
        hi = 0.0
        lo = mu_star * (1.0 - 1e-9)
        for _ in range(60):
            if phi(lo) > 0:
                break
            lo = mu_star + (lo - mu_star) / 10.0
        mu = brentq(phi, lo, hi, xtol=1e-15)
        y = xp / (1.0 + mu * lam)
        return float(np.linalg.norm(y - xp))


class Box(ConvexBody):
    def __init__(self, halfwidths, center=None):
        self.halfwidths = np.asarray(halfwidths, dtype=float)
        self.dim = self.halfwidths.shape[0]
        check_dim(self.dim)
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, float)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        r = np.abs(np.asarray(x, float) - self.center)
        return bool(np.all(r <= self.halfwidths + tol))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        p = self.center + np.sign(u) * self.halfwidths
        return float(u @ p), p

    def support_value(self, u):
        u = np.asarray(u, dtype=float)
        return float(u @ self.center) + float(np.abs(u) @ self.halfwidths)

    def support_batch(self, dirs):
        return dirs @ self.center + np.abs(dirs) @ self.halfwidths

    def _delta_interior(self, x):
        r = np.abs(np.asarray(x, float) - self.center)
        return float(np.min(self.halfwidths - r))

    def as_polytope(self) -> Polytope:
        d = self.dim
        corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).reshape(d, -1).T
        return geometry.convex_hull(corners * self.halfwidths + self.center)


class LpBall(ConvexBody):
    def __init__(self, p: float, radius: float = 1.0, dim: int = 2):
        if p < 1:
            raise GeometryInvalid("p must be >= 1")
        self.p = float(p)
        self.radius = float(radius)
        self.dim = dim
        check_dim(dim)
        self.center = np.zeros(dim)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        if math.isinf(self.p):
            return bool(np.all(np.abs(x) <= self.radius + tol))
        return float(np.linalg.norm(x, ord=self.p)) <= self.radius + tol

    def support(self, u):
        u = np.asarray(u, dtype=float)
        if math.isinf(self.p):
            p = self.radius * np.sign(u)
            return float(u @ p), p
        if self.p == 1.0:
            i = int(np.argmax(np.abs(u)))
            p = np.zeros(self.dim)
            p[i] = self.radius * np.sign(u[i])
            return float(u @ p), p
        q = self.p / (self.p - 1.0)
        a = np.abs(u)
        nq = float(np.linalg.norm(u, ord=q))
        p = self.radius * np.sign(u) * (a / nq) ** (q - 1.0)
        return float(u @ p), p

    def support_value(self, u):
        return self.support(u)[0]


class PolytopeBody(ConvexBody):
    def __init__(self, P: Polytope):
        self.polytope = P
        self.dim = P.dim

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.polytope.contains(x, tol=tol)

    def support(self, u):
        p = self.polytope.support_point(u)
        return float(np.asarray(u, float) @ p), p

    def support_value(self, u):
        return self.polytope.support(u)

    def support_batch(self, dirs):
        return np.max(dirs @ self.polytope.vertices.T, axis=1)

    def _delta_interior(self, x):
        P = self.polytope
        return float(np.min(P.offsets - P.normals @ np.asarray(x, float)))


class TransformedBody(ConvexBody):
    """Affine image T(K) of another body, via oracle composition."""

    def __init__(self, T: AffineMap, body: ConvexBody):
        self.map = T
        self.body = body
        self.dim = body.dim

    def contains(self, x, tol=MEMBERSHIP_TOL):
        y = self.map.apply_inverse(np.asarray(x, float)[None, :])[0]
        # tolerance distorts under the map; scale by the inverse norm
        s = float(np.linalg.norm(self.map.inverse_linear, 2))
        return self.body.contains(y, tol=tol * s)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        v = self.map.linear.T @ u
        _, p = self.body.support(v)
        q = self.map.apply(p[None, :])[0]
        return float(u @ q), q

    def support_value(self, u):
        return self.support(u)[0]


def transform_body(body: ConvexBody, T: AffineMap) -> ConvexBody:
    """Affine image of a body, specialized to an exact variant when possible."""
    if isinstance(body, PolytopeBody):
        return PolytopeBody(geometry.apply_map(T, body.polytope))
    if isinstance(body, (Ball, EllipsoidBody)):
        if isinstance(body, Ball):
            A = np.eye(body.dim) / body.radius**2
            c = body.center
        else:
            A, c = body.shape, body.center
        Li = T.inverse_linear
        A2 = Li.T @ A @ Li
        A2 = 0.5 * (A2 + A2.T)
        return EllipsoidBody(T.apply(c[None, :])[0], A2)
    if isinstance(body, Box):
        return PolytopeBody(geometry.apply_map(T, body.as_polytope()))
    if isinstance(body, LpBall):
        if body.p == 2.0:
            return transform_body(Ball(body.radius, dim=body.dim), T)
        if math.isinf(body.p):
            return transform_body(Box(np.full(body.dim, body.radius)), T)
        if body.p == 1.0:
            verts = np.vstack([np.eye(body.dim), -np.eye(body.dim)]) * body.radius
            return PolytopeBody(geometry.apply_map(T, geometry.convex_hull(verts)))
        return TransformedBody(T, body)
    if isinstance(body, TransformedBody):
        return transform_body(body.body, T.compose(body.map))
    return TransformedBody(T, body)


# -- John ellipsoid and canonical form ---------------------------------------

def john_ellipsoid(K: ConvexBody) -> Ellipsoid:
    """Maximum-volume inscribed ellipsoid.

    Closed forms for the analytic bodies; a log-det program on the H-rep
    for polytopes; affine push-forward for transformed bodies.
    """
    if isinstance(K, Ball):
        return Ellipsoid(K.center, np.eye(K.dim) / K.radius**2)
    if isinstance(K, EllipsoidBody):
        return K.ell
    if isinstance(K, Box):
        return Ellipsoid(K.center, np.diag(1.0 / K.halfwidths**2))
    if isinstance(K, LpBall):
        r = K.radius if K.p >= 2 else K.radius * K.dim ** (0.5 - 1.0 / K.p)
        if math.isinf(K.p):
            r = K.radius
        return Ellipsoid(np.zeros(K.dim), np.eye(K.dim) / r**2)
    if isinstance(K, PolytopeBody):
        return _inscribed_ellipsoid_hrep(K.polytope)
    if isinstance(K, TransformedBody):
        E = john_ellipsoid(K.body)
        Li = K.map.inverse_linear
        A2 = Li.T @ E.shape @ Li
        return Ellipsoid(K.map.apply(E.center[None, :])[0], 0.5 * (A2 + A2.T))
    raise NotConverged(f"no John ellipsoid route for {type(K).__name__}")


def _inscribed_ellipsoid_hrep(P: Polytope) -> Ellipsoid:
    import cvxpy as cp

    d = P.dim
    B = cp.Variable((d, d), symmetric=True)
    c = cp.Variable(d)
    cons = [B >> 1e-12 * np.eye(d)]
    for n, b in zip(P.normals, P.offsets):
        cons.append(cp.norm(B @ n, 2) + n @ c <= b)
    prob = cp.Problem(cp.Maximize(cp.log_det(B)), cons)
    prob.solve(solver=cp.SCS, verbose=False)
    if B.value is None:
        raise NotConverged("inscribed-ellipsoid program did not solve")
    Bv = 0.5 * (B.value + B.value.T)
    A = np.linalg.inv(Bv @ Bv)
    return Ellipsoid(np.asarray(c.value, float), 0.5 * (A + A.T))


@dataclass(frozen=True)
class CanonicalForm:
    """Affine reduction to a body nested between sqrt(g)B0 and B0/sqrt(g)."""

    map: AffineMap
    gamma: float
    body: ConvexBody


def to_canonical(K: ConvexBody, n_check: int = 1024) -> CanonicalForm:
    """Map the John ellipsoid to a centered ball, rescale into the gamma
    sandwich, and report the sampled achieved gamma (conservative)."""
    d = K.dim
    E = john_ellipsoid(K)
    evals, evecs = np.linalg.eigh(E.shape)
    half = evecs @ np.diag(np.sqrt(evals)) @ evecs.T  # maps E to the unit ball
    T1 = AffineMap(half, -half @ E.center)
    body1 = transform_body(K, T1)

    if isinstance(body1, PolytopeBody):
        P1 = body1.polytope
        r_in = float(np.min(P1.offsets - P1.normals @ np.zeros(d)))
        r_out = float(np.max(np.linalg.norm(P1.vertices, axis=1)))
    else:
        dirs = unit_directions(d, n_check)
        sup = body1.support_batch(dirs)
        r_in = float(np.min(sup))
        r_out = float(np.max(sup))
    # scale so the sandwich radii are reciprocal: gamma = r_in / r_out >= 1/d
    s = 1.0 / math.sqrt(r_in * r_out)
    T = AffineMap(s * T1.linear, s * T1.translation)
    body = transform_body(K, T)
    gamma = min(1.0, (r_in / r_out) * (1.0 - 1e-9))
    return CanonicalForm(T, gamma, body)


# -- boundary-distance utilities ---------------------------------------------

def delta(K: ConvexBody, x) -> float:
    return K.delta(x)


def ray_distance(K: ConvexBody, x) -> float:
    """Distance from x to the boundary along the origin ray through x."""
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx < 1e-14:
        raise OriginQuery("ray distance undefined at the origin")
    p = K.boundary_ray(np.zeros_like(x), x / nx)
    return float(np.linalg.norm(p - x))


def point_at_depth(K: ConvexBody, u, depth: float) -> np.ndarray:
    """Point on the origin ray along u whose boundary distance equals depth."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    d0 = K.delta(np.zeros(K.dim))
    if depth >= d0:
        raise DepthTooLarge(f"depth {depth} >= delta(O) = {d0}")
    if depth <= 0:
        raise GeometryInvalid("depth must be positive")
    if isinstance(K, PolytopeBody):
        # delta along the ray is min_i (b_i - t n_i.u), piecewise linear, so
        # the farthest point with delta >= depth has a closed form
        P = K.polytope
        c = P.normals @ u
        pos = c > 1e-14
        if not np.any(pos):
            raise GeometryInvalid("unbounded direction")
        t = float(np.min((P.offsets[pos] - depth) / c[pos]))
        return t * u
    t_hi = float(np.linalg.norm(K.boundary_ray(np.zeros(K.dim), u)))
    t_lo = 0.0
    # delta is concave along the ray: {delta >= depth} is an interval from t_lo
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (t_lo + t_hi)
        if K.delta(mid * u) >= depth:
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo < 1e-13:
            break
    return t_lo * u


# -- JSON body specification -------------------------------------------------

def body_from_spec(spec: dict) -> ConvexBody:
    """Body from the CLI's JSON description.

    {"type": "ball"|"box"|"ellipsoid"|"lp"|"polytope"|"transformed",
     "dim": d, ...params}
    """
    kind = spec["type"]
    d = int(spec.get("dim", 2))
    if kind == "ball":
        return Ball(spec.get("radius", 1.0), center=spec.get("center"), dim=d)
    if kind == "box":
        return Box(spec.get("halfwidths", [1.0] * d), center=spec.get("center"))
    if kind == "ellipsoid":
        if "axes" in spec:
            ax = np.asarray(spec["axes"], dtype=float)
            shape = np.diag(1.0 / ax**2)
        else:
            shape = np.asarray(spec["shape"], dtype=float)
        return EllipsoidBody(spec.get("center", np.zeros(d)), shape)
    if kind == "lp":
        return LpBall(float(spec["p"]), radius=spec.get("radius", 1.0), dim=d)
    if kind == "polytope":
        return PolytopeBody(geometry.convex_hull(np.asarray(spec["vertices"], float)))
    if kind == "transformed":
        inner = body_from_spec(spec["body"])
        T = AffineMap(np.asarray(spec["linear"], float),
                      np.asarray(spec.get("translation", np.zeros(d)), float))
        return transform_body(inner, T)
    raise GeometryInvalid(f"unknown body type {kind!r}")
