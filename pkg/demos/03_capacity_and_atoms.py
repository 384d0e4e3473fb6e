"""
Points, capacity and singular data
==================================

In one dimension a point has positive capacity exactly when alpha > 1.
When it has none, a Dirac mass is invisible to the singular equation:
mollified versions of it produce solutions that fade away from the atom.
"""

from singular_elliptic import (MeasureSpec, Nonlinearity, RefinementSchedule, point_capacity_refinement,
                               run_vanishing)

for alpha in (2.0, 1.5, 0.5):
    values = point_capacity_refinement(alpha, 0.5, (127, 255, 511, 1023))
    print(f"alpha={alpha}  " + "  ".join(f"N={n}: {c:.4f}" for n, c in values))

sched = RefinementSchedule(((63, 0.25), (127, 0.0625), (255, 0.0157), (511, 0.0079)))
g = Nonlinearity.power(1.0)
for alpha in (0.5, 2.0):
    rep = run_vanishing(alpha, g, MeasureSpec.dirac(0.5), sched)
    print(f"alpha={alpha}  trimmed max={[round(v, 4) for v in rep.max_values]}  {rep.params['verdict']}")
