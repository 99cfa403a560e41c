"""End-to-end acceptance suite.

Each test covers one acceptance criterion and prints a single PASS/FAIL
line (straight to the terminal, bypassing capture) before asserting.
Expensive end-to-end builds are cached and shared across criteria.
"""

import itertools
import json
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from capcover.bodies import (
    Ball,
    Box,
    EllipsoidBody,
    PolytopeBody,
    point_at_depth,
)
from capcover.caps import (
    boundary_packing,
    macbeath,
    polytopal_proxy,
    volume_histogram,
)
from capcover.construction import (
    ConstructionConfig,
    approximate,
    bronshteyn_ivanov,
    dudley,
)
from capcover.geometry import convex_hull, face_lattice
from capcover.metrics import (
    emit_json,
    fit_scaling,
    hausdorff_inner,
    run_experiment,
    strip_runtime,
)
from capcover.polar import dual_cap_polar, mahler_cap_product, polar_body
from capcover.sampling import unit_directions

from support import canonical_cube, canonical_random_polytope


def _report(capsys, num, name, ok, detail=""):
    with capsys.disabled():
        mark = "PASS" if ok else "FAIL"
        print(f"\n[criterion {num:2d}] {name}: {mark}"
              + (f"  ({detail})" if detail else ""), flush=True)


def _random_polytope_body(d):
    rng = np.random.default_rng(42 + d)
    return PolytopeBody(convex_hull(rng.standard_normal((30, d))))


def _bodies(d):
    if d == 2:
        ell = EllipsoidBody(np.zeros(2), np.diag([1 / 4.0, 1.0]))
    else:
        ell = EllipsoidBody(np.zeros(3), np.diag([1 / 4.0, 1.0, 4.0]))
    return {
        "ball": Ball(1.0, dim=d),
        "cube": Box(np.ones(d)),
        "ellipsoid": ell,
        "poly30": _random_polytope_body(d),
    }


_APPROX = {}


def _approx(name, d, eps):
    key = (name, d, eps)
    if key not in _APPROX:
        K = _bodies(d)[name]
        hs = 1000 if d == 2 else 200
        _APPROX[key] = approximate(
            K, eps, ConstructionConfig(seed=0, verify_halfspaces=hs))
    return _APPROX[key]


# -- 1: inner eps-approximation ----------------------------------------------

def test_criterion_1_eps_approximation(capsys):
    bad = []
    worst = 0.0
    for d in (2, 3):
        bodies = _bodies(d)
        for name, eps in itertools.product(bodies, (0.1, 0.05, 0.02)):
            res = _approx(name, d, eps)
            K = bodies[name]
            inside = all(K.contains(v, tol=1e-9) for v in res.P.vertices)
            worst = max(worst, res.hausdorff_est / eps)
            if not inside or res.hausdorff_est > 1.05 * eps:
                bad.append((name, d, eps, inside, res.hausdorff_est))
    ok = not bad
    _report(capsys, 1, "inner eps-approximation", ok,
            f"24 cells, worst hausdorff/eps = {worst:.3f}" if ok else str(bad))
    assert ok


# -- 2: complexity exponent ---------------------------------------------------

EPS_GRID = (0.1, 0.05, 0.02, 0.01, 0.005)


def _slope(d):
    eps = list(EPS_GRID)
    totals = [_approx("ball", d, e).profile.total for e in eps]
    x = np.log(1.0 / np.array(eps))
    y = np.log(np.array(totals, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    r2 = 1.0 - np.sum((y - pred) ** 2) / np.sum((y - np.mean(y)) ** 2)
    return float(slope), float(r2), totals


def test_criterion_2_complexity_exponent(capsys):
    s2, r22, t2 = _slope(2)
    s3, r23, t3 = _slope(3)
    ok = (0.2 <= s2 <= 1.0 and r22 >= 0.9
          and 0.6 <= s3 <= 1.5 and r23 >= 0.9)
    _report(capsys, 2, "complexity exponent", ok,
            f"d=2 slope {s2:.2f} R2 {r22:.3f} totals {t2}; "
            f"d=3 slope {s3:.2f} R2 {r23:.3f} totals {t3}")
    assert ok


# -- 3: volume-sensitive packing bound ---------------------------------------

def _packing_counts(d, eps):
    P = canonical_cube(d).polytope
    pack = boundary_packing(P, eps, seed=0, n_dirs=2048 if d == 2 else 4096)
    return volume_histogram(pack, eps)


def test_criterion_3_packing_bound(capsys):
    details = []
    ok = True
    for d in (2, 3):
        hist_fit = _packing_counts(d, 0.05)
        # fit the single constant at eps = 0.05
        C = 0.0
        for j, n in hist_fit.items():
            v = 2.0 ** j * 0.05 ** ((d + 1) / 2.0)
            C = max(C, n / min(0.05 / v, v / 0.05 ** d))
        hist_chk = _packing_counts(d, 0.02)
        worst = 0.0
        for j, n in hist_chk.items():
            v = 2.0 ** j * 0.02 ** ((d + 1) / 2.0)
            bound = 2.0 * C * min(0.02 / v, v / 0.02 ** d)
            worst = max(worst, n / bound)
            if n > bound:
                ok = False
        details.append(f"d={d} C={C:.1f} worst fill {worst:.2f}")
    _report(capsys, 3, "volume-sensitive packing bound", ok, "; ".join(details))
    assert ok


# -- 4: Mahler cap product ----------------------------------------------------

def test_criterion_4_mahler_cap_product(capsys):
    dirs = unit_directions(2, 256, seed=0)
    ok = True
    details = []
    for name, P in (("cube", canonical_cube(2).polytope),
                    ("poly", canonical_random_polytope(2, 20, seed=11).polytope)):
        meds = {}
        for eps in (0.01, 0.0025):
            vals = np.array([mahler_cap_product(P, u, eps) / eps ** 3
                             for u in dirs])
            band = float(vals.max() / vals.min())
            if band > 50.0:
                ok = False
            meds[eps] = float(np.median(vals))
            details.append(f"{name} eps={eps} band {band:.1f}")
        r = meds[0.01] / meds[0.0025]
        if not (0.25 <= r <= 4.0):
            ok = False
        details.append(f"{name} med-ratio {r:.2f}")
    _report(capsys, 4, "Mahler cap product", ok, "; ".join(details))
    assert ok


# -- 5: dual-cap polar identity ----------------------------------------------

def test_criterion_5_dual_cap_identity(capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    n = 0
    while n < 50:
        a, b = sorted(rng.uniform(-1.5, 1.5, size=2))
        if b - a < 0.2:
            continue
        h0 = rng.uniform(0.5, 2.0)
        t = rng.uniform(0.1, 0.9)
        xflat = a + t * (b - a)
        res = dual_cap_polar(np.array([[a - xflat, h0], [b - xflat, h0]]),
                             z=np.array([0.0, h0 * rng.uniform(1.2, 3.0)]),
                             x=np.array([0.0, h0]))
        worst = max(worst, res.max_vertex_mismatch)
        n += 1
    while n < 100:
        tri = rng.uniform(-1.0, 1.0, size=(3, 2))
        tri = tri - tri.mean(axis=0)
        pts = np.column_stack([tri, np.ones(3)])
        res = dual_cap_polar(pts, z=np.array([0.0, 0.0, rng.uniform(1.5, 4.0)]),
                             x=np.array([0.0, 0.0, 1.0]))
        worst = max(worst, res.max_vertex_mismatch)
        n += 1
    ok = worst <= 1e-6
    _report(capsys, 5, "dual-cap polar identity", ok,
            f"100 instances, worst vertex mismatch {worst:.2e}")
    assert ok


# -- 6: witness-collector properties ------------------------------------------

def test_criterion_6_witness_collector(capsys):
    ok = True
    details = []
    for name in ("ball", "cube"):
        occ = {}
        for eps in (0.05, 0.02):
            rep = _approx(name, 2, eps).stats["verification"]
            if rep["halfspaces"] < 1000 or rep["fail_both"] != 0:
                ok = False
            if rep["max_points_per_collector"] > 64:
                ok = False
            occ[eps] = rep["max_points_per_collector"]
            details.append(f"{name} eps={eps} fail_both={rep['fail_both']} "
                           f"occ={occ[eps]}")
        r = max(occ.values()) / max(1, min(occ.values()))
        if r > 2.0:
            ok = False
        details.append(f"{name} occ-ratio {r:.2f}")
    _report(capsys, 6, "witness-collector properties", ok, "; ".join(details))
    assert ok


# -- 7: kernel oracle equivalence ---------------------------------------------

def _brute_face_counts(P):
    """f-vector by LP feasibility over flat-closed vertex subsets."""
    V = P.vertices
    n, d = V.shape
    counts = [0] * d
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            S = V[list(idx)]
            M = S[1:] - S[0]
            rank = int(np.sum(np.linalg.svd(M, compute_uv=False) > 1e-9)) \
                if size > 1 else 0
            if rank >= d:
                continue
            # flat closure: no outside vertex on the affine hull of S
            closed = True
            for w in range(n):
                if w in idx:
                    continue
                M2 = np.vstack([M, V[w] - S[0]]) if size > 1 \
                    else (V[w] - S[0])[None, :]
                r2 = int(np.sum(np.linalg.svd(M2, compute_uv=False) > 1e-9))
                if r2 == rank:
                    closed = False
                    break
            if not closed:
                continue
            # supporting direction: u.(v_i - v_0) = 0 on S, u.(w - v_0) <= -1 off S
            out = [w for w in range(n) if w not in idx]
            A_ub = V[out] - S[0]
            A_eq = M if size > 1 else None
            c = np.zeros(d)
            res = linprog(c, A_ub=A_ub if len(out) else None,
                          b_ub=-np.ones(len(out)) if len(out) else None,
                          A_eq=A_eq, b_eq=np.zeros(len(M)) if size > 1 else None,
                          bounds=[(None, None)] * d, method="highs")
            if res.status == 0:
                counts[rank] += 1
    return tuple(counts)


def test_criterion_7_kernel_oracle_equivalence(capsys):
    ok = True
    details = []
    # face lattice vs subset brute force
    lattice_bad = 0
    for seed in range(50):
        rng = np.random.default_rng(300 + seed)
        d = 2 + seed % 2
        P = convex_hull(rng.standard_normal((8 + seed % 5, d)))
        if P.n_vertices > 12:
            continue
        if P.face_lattice().f_vector != _brute_face_counts(P):
            lattice_bad += 1
    if lattice_bad:
        ok = False
    details.append(f"lattice mismatches {lattice_bad}/50")

    # volume / centroid vs Monte Carlo
    mc_bad = 0
    rng = np.random.default_rng(99)
    for seed in range(10):
        d = 2 + seed % 2
        P = convex_hull(np.random.default_rng(500 + seed).standard_normal((12, d)))
        lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
        boxvol = float(np.prod(hi - lo))
        pts = rng.uniform(lo, hi, size=(1_000_000, d))
        inside = P.contains_many(pts, tol=0.0)
        p = float(np.mean(inside))
        sig_v = boxvol * math.sqrt(p * (1 - p) / len(pts))
        if abs(P.volume - p * boxvol) > 3 * sig_v:
            mc_bad += 1
        cent = pts[inside].mean(axis=0)
        sig_c = pts[inside].std(axis=0) / math.sqrt(int(inside.sum()))
        if np.any(np.abs(P.centroid - cent) > 3 * sig_c):
            mc_bad += 1
    if mc_bad:
        ok = False
    details.append(f"MC vol/centroid misses {mc_bad}/20")

    # Macbeath membership biconditional
    mac_bad = 0
    for seed in range(5):
        rng2 = np.random.default_rng(700 + seed)
        P = convex_hull(rng2.standard_normal((12, 2 + seed % 2)))
        x = P.centroid + 0.3 * (P.vertices[0] - P.centroid)
        R = macbeath(P, x, 1.0).region
        lo, hi = R.vertices.min(axis=0) - 0.1, R.vertices.max(axis=0) + 0.1
        pts = rng2.uniform(lo, hi, size=(10_000, P.dim))
        in_region = R.contains_many(pts, tol=1e-9)
        direct = P.contains_many(pts, tol=1e-9) \
            & P.contains_many(2 * x - pts, tol=1e-9)
        # exclude the boundary band where the two tolerances can disagree
        margin = np.max(pts @ R.normals.T - R.offsets, axis=1)
        clear = np.abs(margin) > 1e-7
        mac_bad += int(np.sum(in_region[clear] != direct[clear]))
    if mac_bad:
        ok = False
    details.append(f"Macbeath mismatches {mac_bad}")

    # polar involution
    inv_worst = 0.0
    for seed in range(10):
        rng3 = np.random.default_rng(800 + seed)
        P = convex_hull(rng3.standard_normal((12, 3)))
        pair = polar_body(P, P.centroid)
        back = polar_body(pair.polar, np.zeros(3)).polar
        A = np.asarray(sorted(map(tuple, np.round(back.vertices, 12))))
        B = np.asarray(sorted(map(tuple, np.round(pair.primal.vertices, 12))))
        inv_worst = max(inv_worst, float(np.max(np.abs(A - B))))
    if inv_worst > 1e-9:
        ok = False
    details.append(f"involution worst {inv_worst:.1e}")

    _report(capsys, 7, "kernel oracle equivalence", ok, "; ".join(details))
    assert ok


# -- 8: Macbeath lemma suite --------------------------------------------------

def test_criterion_8_macbeath_lemma_suite(capsys):
    from support import (
        check_cap_absorbs_region,
        check_cap_inside_scaled_region,
        check_depth_stability,
        check_minimal_cap_width_band,
        check_overlap_containment,
        interior_points_near_boundary,
        sample_polytope_points,
    )
    from capcover.caps import make_cap
    from capcover.sampling import random_directions

    totals = {}
    ok = True
    for d in (2, 3):
        for bname, P in (("cube", canonical_cube(d).polytope),
                         ("poly", canonical_random_polytope(d, 25, seed=60 + d)
                          .polytope)):
            body = PolytopeBody(P)
            rng = np.random.default_rng(1000 + d)
            # overlap containment
            pairs = []
            while len(pairs) < 30:
                x = rng.uniform(-0.5, 0.5, size=d)
                if not P.contains(x) or body.delta(x) < 0.04:
                    continue
                y = sample_polytope_points(macbeath(P, x, 0.2).region, 1, rng)[0]
                pairs.append((x, y))
            b1 = check_overlap_containment(P, pairs)
            # cap absorbs region
            configs = []
            for _ in range(25):
                u = random_directions(d, 1, rng)[0]
                w = rng.uniform(0.02, 0.15)
                x = point_at_depth(body, random_directions(d, 1, rng)[0],
                                   rng.uniform(0.02, 0.15))
                configs.append((x, u, w))
            b2 = check_cap_absorbs_region(P, configs)
            # narrow cap in scaled region
            caps = [make_cap(P, random_directions(d, 1, rng)[0],
                             rng.uniform(0.01, 0.08)) for _ in range(30)]
            b3 = check_cap_inside_scaled_region(P, caps, d)
            # minimal cap width band
            pts = interior_points_near_boundary(
                body, [0.02, 0.05], unit_directions(d, 7, seed=d))
            b4, _ = check_minimal_cap_width_band(P, pts, gamma=0.4)
            # depth stability
            pts2 = interior_points_near_boundary(
                body, [0.05, 0.12], unit_directions(d, 4, seed=d + 1))
            b5 = check_depth_stability(P, pts2, rng, n_samples=40)
            n_cfg = len(pairs) + len(configs) + len(caps) + len(pts) + len(pts2)
            bad = b1 + b2 + b3 + b4 + b5
            totals[(bname, d)] = (n_cfg, bad)
            if bad or n_cfg < 100:
                ok = False
    n_all = sum(v[0] for v in totals.values())
    _report(capsys, 8, "Macbeath lemma suite", ok,
            f"{n_all} configs over {len(totals)} bodies, "
            f"violations {sum(v[1] for v in totals.values())}")
    assert ok


# -- 9: baselines -------------------------------------------------------------

def test_criterion_9_baselines(capsys):
    K = Ball(1.0, dim=2)
    eps_list = [0.1, 0.05, 0.02, 0.01, 0.004]
    dud_counts, bi_counts = [], []
    approx_ok = True
    dirs = unit_directions(2, 4000)
    for eps in eps_list:
        Pd = dudley(K, eps)
        dud_counts.append(Pd.face_lattice().f_vector[-1])
        hP = np.max(dirs @ Pd.vertices.T, axis=1)
        hK = K.support_batch(dirs)
        if np.min(hP - hK) < -1e-9 or np.max(hP - hK) > 1.05 * eps:
            approx_ok = False
        Pb = bronshteyn_ivanov(K, eps)
        bi_counts.append(Pb.n_vertices)
        if not all(K.contains(v, tol=1e-9) for v in Pb.vertices):
            approx_ok = False
        if hausdorff_inner(Pb, K) > 1.05 * eps:
            approx_ok = False

    def slope(counts):
        x = np.log(1.0 / np.array(eps_list))
        y = np.log(np.array(counts, dtype=float))
        return float(np.polyfit(x, y, 1)[0])

    sd, sb = slope(dud_counts), slope(bi_counts)
    ok = approx_ok and abs(sd - 0.5) <= 0.2 and abs(sb - 0.5) <= 0.2
    _report(capsys, 9, "baseline sanity", ok,
            f"dudley slope {sd:.2f}, b-i slope {sb:.2f}, "
            f"approximations {'ok' if approx_ok else 'BAD'}")
    assert ok


# -- 10: determinism ----------------------------------------------------------

def test_criterion_10_determinism(capsys, tmp_path):
    grid = {"bodies": [{"id": "ball2",
                        "spec": {"type": "ball", "dim": 2, "radius": 1.0}}],
            "eps": [0.1, 0.05], "methods": ["layered", "bi"], "seeds": [0]}
    paths = []
    for i in (1, 2):
        recs, fits = run_experiment(grid)
        p = tmp_path / f"run{i}.json"
        emit_json(recs, fits, str(p))
        paths.append(p)
    payloads = [strip_runtime(json.loads(p.read_text())) for p in paths]
    blobs = [json.dumps(pl, indent=2, sort_keys=True).encode() for pl in payloads]
    ok = blobs[0] == blobs[1]
    _report(capsys, 10, "experiment determinism", ok,
            f"{len(blobs[0])} bytes compared")
    assert ok
