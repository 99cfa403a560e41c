"""Hausdorff estimation, experiment sweeps, regression fits, and emitters.

The Hausdorff distance between a polytope nested inside a convex body equals
the largest directional support deficit, so the estimator samples a
quasi-uniform direction set and locally refines the worst directions.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bodies import ConvexBody, PolytopeBody, body_from_spec
from .construction import ConstructionConfig, approximate, bronshteyn_ivanov, dudley
from .errors import ConfigError, NotNested
from .geometry import Polytope, orthonormal_frame
from .sampling import unit_directions

CSV_COLUMNS = ["body", "dim", "eps", "method", "seed", "vertices",
               "total_faces", "hausdorff", "runtime_ms"]


def hausdorff_inner(P: Polytope, K: ConvexBody, n_dirs: int = 10_000,
                    refine: int = 32) -> float:
    """Hausdorff distance from a body to a nested inner polytope.

    Equals max over unit directions of h_K(u) - h_P(u); estimated on a
    deterministic direction lattice with Nelder-Mead polish around the
    worst directions.
    """
    for v in P.vertices:
        if not K.contains(v, tol=1e-9):
            raise NotNested("polytope vertex outside the body")
    d = K.dim
    dirs = unit_directions(d, n_dirs)
    hP = np.max(dirs @ P.vertices.T, axis=1)
    hK = K.support_batch(dirs)
    deficit = hK - hP
    best = float(np.max(deficit))
    if refine <= 0:
        return max(best, 0.0)
    worst = np.argsort(deficit)[-refine:]
    for i in worst:
        u0 = dirs[i]
        R = orthonormal_frame(u0)

        def negdef(s):
            w = R.T @ np.concatenate([s, [1.0]])
            w = w / np.linalg.norm(w)
            return -(K.support_value(w) - float(np.max(P.vertices @ w)))

        res = minimize(negdef, np.zeros(d - 1), method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": 200})
        best = max(best, -float(res.fun))
    return max(best, 0.0)


@dataclass
class ExperimentRecord:
    body: str
    dim: int
    eps: float
    method: str
    seed: int
    vertices: int = 0
    total_faces: int = 0
    hausdorff: float = float("nan")
    runtime_ms: float = 0.0
    error: str = None
    extra: dict = field(default_factory=dict)

    def to_row(self) -> list:
        return [self.body, self.dim, repr(self.eps), self.method, self.seed,
                self.vertices, self.total_faces, repr(self.hausdorff),
                repr(self.runtime_ms)]

    def to_json_dict(self) -> dict:
        out = {
            "body": self.body, "dim": self.dim, "eps": self.eps,
            "method": self.method, "seed": self.seed,
            "vertices": self.vertices, "total_faces": self.total_faces,
            "hausdorff": self.hausdorff, "runtime_ms": self.runtime_ms,
        }
        if self.error:
            out["error"] = self.error
        if self.extra:
            out["extra"] = self.extra
        return out


@dataclass
class ScalingFit:
    method: str
    body: str
    dim: int
    slope: float
    intercept: float
    r2: float
    n_points: int

    def to_json_dict(self) -> dict:
        return {"method": self.method, "body": self.body, "dim": self.dim,
                "slope": self.slope, "intercept": self.intercept,
                "r2": self.r2, "n_points": self.n_points}


def fit_scaling(records) -> list:
    """log(total faces) vs log(1/eps) least squares per (body, dim, method)."""
    groups = {}
    for r in records:
        if r.error or r.total_faces <= 0:
            continue
        groups.setdefault((r.body, r.dim, r.method), []).append(r)
    fits = []
    for (body, dim, method), rs in groups.items():
        if len(rs) < 2:
            continue
        x = np.log(1.0 / np.array([r.eps for r in rs]))
        y = np.log(np.array([r.total_faces for r in rs], dtype=float))
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - np.mean(y)) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        fits.append(ScalingFit(method, body, dim, float(slope),
                               float(intercept), r2, len(rs)))
    return fits


def _run_cell(body_spec: dict, body_id: str, eps: float, method: str,
              seed: int) -> ExperimentRecord:
    K = body_from_spec(body_spec)
    rec = ExperimentRecord(body_id, K.dim, eps, method, seed)
    t0 = time.perf_counter()
    try:
        if method == "layered":
            cfg = ConstructionConfig(seed=seed)
            res = approximate(K, eps, cfg)
            rec.vertices = res.profile.f_vector[0]
            rec.total_faces = res.profile.total
            rec.hausdorff = res.hausdorff_est
            rec.extra = {"witness_count": len(res.S),
                         "collector_max_points": res.stats["verification"][
                             "max_points_per_collector"]}
        elif method in ("dudley", "bi"):
            if method == "dudley":
                P = dudley(K, eps)
                # outer approximation: support excess, sampled
                dirs = unit_directions(K.dim, 10_000)
                hP = np.max(dirs @ P.vertices.T, axis=1)
                rec.hausdorff = float(np.max(hP - K.support_batch(dirs)))
            else:
                P = bronshteyn_ivanov(K, eps)
                rec.hausdorff = hausdorff_inner(P, K)
            prof = P.face_lattice()
            rec.vertices = prof.f_vector[0]
            rec.total_faces = prof.total
        else:
            raise ConfigError(f"unknown method {method!r}")
    except ConfigError:
        raise
    except Exception as exc:  # per-cell failures go into the record
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.runtime_ms = (time.perf_counter() - t0) * 1000.0
    return rec


def worker_count() -> int:
    env = os.environ.get("CAPCOVER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CAPCOVER_THREADS={env!r} is not an integer")
    return 1


def run_experiment(grid: dict):
    """Execute a grid of (body, eps, method, seed) cells.

    grid = {"bodies": [{"id": ..., "spec": {...}}, ...],
            "eps": [...], "methods": [...], "seeds": [...]}
    Returns (records, fits) in deterministic grid order; cells run on a
    thread pool sized by CAPCOVER_THREADS.
    """
    bodies = grid.get("bodies", [])
    eps_list = grid.get("eps", [])
    methods = grid.get("methods", ["layered"])
    seeds = grid.get("seeds", [0])
    cells = [(b, e, m, s) for b in bodies for e in eps_list
             for m in methods for s in seeds]
    if not cells:
        return [], []
    nw = worker_count()
    if nw == 1:
        records = [_run_cell(b["spec"], b["id"], e, m, s)
                   for b, e, m, s in cells]
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=nw) as pool:
            records = list(pool.map(
                lambda c: _run_cell(c[0]["spec"], c[0]["id"], c[1], c[2], c[3]),
                cells))
    return records, fit_scaling(records)


# -- emitters -----------------------------------------------------------------

def emit_csv(records, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.to_row())


def parse_csv(path: str) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(ExperimentRecord(
                body=row["body"], dim=int(row["dim"]), eps=float(row["eps"]),
                method=row["method"], seed=int(row["seed"]),
                vertices=int(row["vertices"]),
                total_faces=int(row["total_faces"]),
                hausdorff=float(row["hausdorff"]),
                runtime_ms=float(row["runtime_ms"])))
    return out


def emit_json(records, fits, path: str) -> None:
    payload = {
        "records": [r.to_json_dict() for r in records],
        "fits": [f.to_json_dict() for f in fits],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def strip_runtime(payload: dict) -> dict:
    """Copy of an emitted JSON payload with runtime fields removed, for
    byte-level determinism comparison."""
    out = json.loads(json.dumps(payload))
    for r in out.get("records", []):
        r.pop("runtime_ms", None)
    return out


def emit_svg(records, fits, path: str) -> None:
    """Log-log scatter of total faces vs 1/eps with fitted lines, 800x600."""
    W, H, M = 800, 600, 60
    pts = [(1.0 / r.eps, r.total_faces, r.method) for r in records
           if not r.error and r.total_faces > 0]
    if not pts:
        with open(path, "w") as fh:
            fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" '
                     f'viewBox="0 0 {W} {H}"></svg>\n')
        return
    xs = np.log10([p[0] for p in pts])
    ys = np.log10([p[1] for p in pts])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def sx(v):
        return M + (v - x0) / (x1 - x0) * (W - 2 * M)

    def sy(v):
        return H - M - (v - y0) / (y1 - y0) * (H - 2 * M)

    colors = {}
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<line x1="{M}" y1="{H - M}" x2="{W - M}" y2="{H - M}" stroke="black"/>',
             f'<line x1="{M}" y1="{M}" x2="{M}" y2="{H - M}" stroke="black"/>',
             f'<text x="{W // 2}" y="{H - 15}" font-size="14">log10(1/eps)</text>',
             f'<text x="15" y="{H // 2}" font-size="14" '
             f'transform="rotate(-90 15 {H // 2})">log10(total faces)</text>']
    for lx, ly, m in zip(xs, ys, [p[2] for p in pts]):
        c = colors.setdefault(m, palette[len(colors) % len(palette)])
        parts.append(f'<circle cx="{sx(lx):.1f}" cy="{sy(ly):.1f}" r="4" '
                     f'fill="{c}" fill-opacity="0.7"/>')
    ln10 = math.log(10.0)
    for f in fits:
        c = colors.get(f.method)
        if c is None:
            continue
        ya = (f.slope * x0 * ln10 + f.intercept) / ln10
        yb = (f.slope * x1 * ln10 + f.intercept) / ln10
        parts.append(f'<line x1="{sx(x0):.1f}" y1="{sy(ya):.1f}" '
                     f'x2="{sx(x1):.1f}" y2="{sy(yb):.1f}" '
                     f'stroke="{c}" stroke-dasharray="6 3"/>')
        parts.append(f'<text x="{sx(x1) - 150:.0f}" y="{sy(yb) - 8:.0f}" '
                     f'font-size="12" fill="{c}">{f.method} slope '
                     f'{f.slope:.2f}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def emit(records, fits, out_dir: str, formats=("json", "csv")) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    for fmt in formats:
        path = os.path.join(out_dir, f"records.{fmt}")
        if fmt == "csv":
            emit_csv(records, path)
        elif fmt == "json":
            emit_json(records, fits, path)
        elif fmt == "svg":
            emit_svg(records, fits, path)
        else:
            raise ConfigError(f"unknown output format {fmt!r}")
        written[fmt] = path
    return written
