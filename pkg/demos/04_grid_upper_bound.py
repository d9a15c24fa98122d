"""Random grid points at d=8: how often does the estimated dispersion reach 1/8?"""

import time

from mindisp import experiments as exp

p = exp.GRID_PILOT
for n in (250, 1000, p["n"]):
    cfg = exp.ExperimentConfig(experiment="upper-bound", d_list=[p["d"]], eps_list=[p["eps"]],
                               n_list=[n], m=p["m"], budget=p["budget"], seeds=list(range(10)))
    t0 = time.perf_counter()
    rows, _ = exp.upper_bound_sweep(cfg)
    row = rows[0]
    print(f"n={n:5d}: {row['successes']}/10 seeds at or below eps, "
          f"mean estimate {row['mean_estimate']:.4f} ({time.perf_counter() - t0:.1f}s)")
# The slab between a cube face and the first grid level, 1/(m+1) = 1/9 here,
# is always empty.  Any wider box keeps a fixed fraction of the grid levels on
# every axis and expects many points once n is in the hundreds, so 1/9 is
# where the estimates settle.
print(f"slab floor 1/(m+1) = {1 / (p['m'] + 1):.4f}; estimates are lower bounds, "
      "so a success is evidence, not proof")
