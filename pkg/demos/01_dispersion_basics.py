"""Largest empty open box of a few small point sets, exact and estimated."""

import numpy as np

from mindisp.dispersion import SearchConfig, estimate_dispersion, exact_dispersion
from mindisp.generators import uniform_random
from mindisp.geometry import PointSet

# two points on the diagonal: the best box avoids both, volume 4/9
diag = PointSet.from_rows([(1 / 3, 1 / 3), (2 / 3, 2 / 3)])
res = exact_dispersion(diag)
print("diagonal pair:", res.value, "witness", res.witness.lo, res.witness.hi)

# n equally spaced points on a line leave gaps of 1/(n+1)
for n in (1, 4, 9):
    line = PointSet.from_rows([(i / (n + 1),) for i in range(1, n + 1)])
    print(f"{n} equally spaced points: {exact_dispersion(line).value:.6f}")

# random points: the estimator only ever reports boxes it has checked are empty
xs = uniform_random(40, 3, seed=2)
exact = exact_dispersion(xs)
est = estimate_dispersion(xs, SearchConfig(estimator_budget=64, rng_seed=0))
print(f"40 uniform points in 3d: exact {exact.value:.5f}, estimate {est.value:.5f}, "
      f"{exact.boxes_examined} exact candidates in {exact.seconds:.2f}s")

# any n points leave an empty slab of width at least 1/(n+1)
worst = min(exact_dispersion(PointSet(2, np.random.default_rng(s).random((8, 2)))).value
            for s in range(20))
print(f"smallest dispersion over 20 random 8-point sets: {worst:.4f} >= {1 / 9:.4f}")
