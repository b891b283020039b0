"""Realizing a prescribed reduced system through second-order averaging.

Given polynomial families P_l and Q_l, a perturbation can be built whose
second-order averaged function is proportional to r*P_l + Q_l up to O(delta)
corrections: an order-one angular part plus delta-scaled radial/tail parts.
Zeros of the prescribed reduced system then appear as zeros of the averaged
function, converging linearly in delta.
"""

import math

import numpy as np

from avgcycles import Poly, SearchBox, find_simple_zeros, gen_th4

# reduced system: r*(r - 5/4) = 0, r*(z1^2 - 1/4) = 0
# solutions on r > 0: (5/4, -1/2) and (5/4, 1/2)
P = [Poly(2, {(1, 0): 1.0, (0, 0): -1.25}), Poly(2)]
Q = [Poly(2), Poly(2, {(1, 2): 1.0, (1, 0): -0.25})]
targets = np.array([[1.25, -0.5], [1.25, 0.5]])
box = SearchBox([0.05, -1.25], [2.1, 1.25])

print("reduced system: r*P_0 + Q_0 = r^2 - 5/4 r,  r*P_1 + Q_1 = r z1^2 - r/4")
print(f"known solutions: {targets.tolist()}\n")

for delta in (1e-2, 1e-3, 1e-4):
    result = gen_th4(P, Q, math.pi / 3, delta=delta)
    recs = [r for r in find_simple_zeros(result.notes["normalized"], box) if r.simple]
    dist = max(min(np.linalg.norm(r.nu - t) for r in recs) for t in targets)
    print(f"delta = {delta:.0e}: found {len(recs)} zeros, "
          f"max distance to reduced-system roots = {dist:.2e}")
