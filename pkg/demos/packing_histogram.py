"""Boundary packing of shrunken Macbeath regions on the cube.

The count in each dyadic volume class j (regions of scale-1 volume about
2^j * eps^((d+1)/2)) is bounded by min(eps/v_j, v_j/eps^d) up to a constant,
which is the volume-sensitive refinement over the naive 1/eps^((d-1)/2) bound.

Run:  python3 demos/packing_histogram.py
"""

import numpy as np

from capcover import Box, boundary_packing, polytopal_proxy, volume_histogram

d = 2
eps = 0.02
K = polytopal_proxy(Box(np.ones(d)), eps)
pack = boundary_packing(K, eps, seed=0, n_dirs=2048)

print(f"cube d={d}, eps={eps}: {len(pack.entries)} disjoint regions, "
      f"ray coverage {pack.coverage:.3f}")
print(f"{'class':>6} {'v_j':>10} {'count':>6} {'min-bound':>10}")
for j, n in sorted(volume_histogram(pack).items()):
    v = 2.0 ** j * eps ** ((d + 1) / 2.0)
    bound = min(eps / v, v / eps ** d)
    print(f"{j:>6} {v:>10.2e} {n:>6} {bound:>10.2f}")
