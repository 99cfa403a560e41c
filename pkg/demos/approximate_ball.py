"""Build an inner approximation of the unit ball and inspect the result.

Run:  python3 demos/approximate_ball.py
"""

import numpy as np

from capcover import Ball, ConstructionConfig, approximate

eps = 0.05
K = Ball(1.0, dim=2)
res = approximate(K, eps, ConstructionConfig(seed=0))

print(f"eps = {eps}")
print(f"witness points: {len(res.S)}")
print(f"hull f-vector:  {res.profile.f_vector} (total {res.profile.total})")
print(f"hausdorff est:  {res.hausdorff_est:.5f} (budget {1.05 * eps:.5f})")

# every vertex must sit inside the body
r = np.linalg.norm(res.P.vertices, axis=1)
print(f"vertex radii:   [{r.min():.6f}, {r.max():.6f}]")

v = res.stats["verification"]
print(f"halfspace stress: fail_both={v['fail_both']}, "
      f"max points per collector={v['max_points_per_collector']}")
print(f"constants: c0={res.constants['c0']:.4f}, c1={res.constants['c1']:.3f}")
