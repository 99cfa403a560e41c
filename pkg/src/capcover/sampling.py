"""Deterministic quasi-uniform direction sampling on the unit sphere.

All sweeps that must be reproducible draw their directions from here; the
seed only enters through a random rotation (d = 2, 3) or a scrambled Halton
sequence (d >= 4), so equal seeds give bit-identical direction sets.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def rng_from_seed(seed):
    return np.random.default_rng(seed)


def random_rotation(d: int, rng) -> np.ndarray:
    """Haar-ish random rotation via QR of a Gaussian matrix."""
    M = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(M)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def fibonacci_sphere(n: int) -> np.ndarray:
    """n quasi-uniform points on the 2-sphere (Fibonacci lattice)."""
    i = np.arange(n)
    z = (2.0 * i + 1.0) / n - 1.0
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_lattice(n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


def unit_directions(d: int, n: int, seed=None) -> np.ndarray:
    """n quasi-uniform unit directions in R^d, seeded deterministically.

    d=2 uses an equally spaced circle lattice, d=3 a Fibonacci sphere (both
    rotated by a seeded rotation); d>=4 falls back to a scrambled Halton
    sequence pushed through the normal quantile.
    """
    if d == 2:
        dirs = circle_lattice(n)
    elif d == 3:
        dirs = fibonacci_sphere(n)
    else:
        from scipy.stats import qmc
        from scipy.special import ndtri
        h = qmc.Halton(d, scramble=True, seed=0 if seed is None else seed)
        g = ndtri(np.clip(h.random(n), 1e-12, 1 - 1e-12))
        nrm = np.linalg.norm(g, axis=1)
        nrm[nrm == 0] = 1.0
        return g / nrm[:, None]
    if seed is not None:
        R = random_rotation(d, rng_from_seed(seed))
        dirs = dirs @ R.T
    return dirs


def random_directions(d: int, n: int, rng) -> np.ndarray:
    g = rng.standard_normal((n, d))
    nrm = np.linalg.norm(g, axis=1)
    nrm[nrm == 0] = 1.0
    return g / nrm[:, None]
