"""Hitting sets pushed through the reduction, next to the reference bounds."""

from mindisp.construction import reference_bounds, run_reduction
from mindisp.experiments import _superimposed_hitting
from mindisp.generators import greedy_hitting

for d, k in [(16, 2), (16, 3), (64, 3), (256, 2)]:
    eps = 2.0**-k
    xs, _ = _superimposed_hitting(d, k, seed=0, cap=10**7)
    rep = run_reduction(xs, eps)
    print(f"d={d:3d} eps={eps}: {rep.n} points, certificate {rep.certificate.verdict}, "
          f"main bound {rep.bounds['main_lower']:.4f}, exceeds all: "
          f"{all(v for v in rep.exceeds.values() if v is not None)}")

xs = greedy_hitting(16, 3)
print(f"greedy hitting set for d=16, eps=1/8 has {len(xs)} points")

print("reference bounds at d=256, eps=1/8 (upper constants not supplied):")
for entry in reference_bounds(0.125, 256):
    value = "n/a" if entry.value is None else f"{entry.value:.5g}"
    print(f"  {entry.name:12s} {entry.kind:5s} {value:>10s}  {entry.note}")
