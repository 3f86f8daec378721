"""
AMLI and nonlinear AMLI on growing grids
========================================

Both cycles use the same hierarchy and W(1,1) smoothing with ``q_4``. AMLI
stabilizes the coarse correction with a fixed polynomial and runs under CG;
nonlinear AMLI does two flexible-CG steps on each coarse level and runs
under restarted flexible CG. The iteration counts should stay nearly flat
as the grid grows. ``run_table`` logs a warning whenever a count jumps by
more than 5 between consecutive sizes; on the smallest grids AMLI can trip
it before settling down.
"""

from uaamli.experiments import RunConfig, run_table

rows = run_table([64, 128, 256], problems=["grid2d"], cycles=["amli", "namli"], cfg=RunConfig())
print(f"{'problem':>12} {'cycle':>6} {'iters':>5} {'grid cx':>8} {'op cx':>8} {'setup s':>8} {'solve s':>8}")
for r in rows:
    print(f"{r['problem']:>12} {r['cycle']:>6} {r['iterations']:5d} {r['grid_complexity']:8.4f} "
          f"{r['operator_complexity']:8.4f} {r['setup_seconds']:8.2f} {r['solve_seconds']:8.2f}")

# The same thing one solve at a time, with the error history.
from uaamli.experiments import run_solve

rep, h = run_solve(RunConfig(n=128, cycle="namli"))
print("\nlevel sizes:", [lev.n for lev in h.levels])
print("relative A-norm error every 5 iterations:")
print("  " + "  ".join(f"{e:.1e}" for e in rep.a_norm_error[::5]))
