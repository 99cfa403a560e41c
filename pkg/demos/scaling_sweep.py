"""Complexity scaling of the layered construction against the baselines.

Sweeps eps on the disk, fits log(total faces) vs log(1/eps), and writes
CSV/JSON/SVG artifacts under demos/out/.

Run:  python3 demos/scaling_sweep.py
"""

from capcover import fit_scaling, run_experiment
from capcover.metrics import emit

grid = {
    "bodies": [{"id": "ball2", "spec": {"type": "ball", "dim": 2, "radius": 1.0}}],
    "eps": [0.1, 0.05, 0.02, 0.01],
    "methods": ["layered", "dudley", "bi"],
    "seeds": [0],
}

records, fits = run_experiment(grid)
for r in records:
    print(f"{r.method:<8} eps={r.eps:<6} total={r.total_faces:<5} "
          f"hausdorff={r.hausdorff:.4f} ({r.runtime_ms:.0f} ms)")
for f in fits:
    print(f"{f.method:<8} slope {f.slope:.2f} (R2 {f.r2:.3f})")

paths = emit(records, fits, "demos/out", ("json", "csv", "svg"))
print("wrote", ", ".join(paths.values()))
