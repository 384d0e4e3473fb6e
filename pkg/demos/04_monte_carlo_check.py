"""
An independent check by random walks
====================================

The solution satisfies u(x) = E int_0^exit g(u(X_t)) dt for the process
started at x. Simulating that expectation checks the deterministic solver
without sharing any of its code. A deliberately wrong profile is rejected.
"""

from singular_elliptic import (Domain, MeasureSpec, Nonlinearity, WalkConfig, assemble, discretize, solve_singular,
                               verify_solution_mc)

dom = Domain(0.0, 1.0, 255)
op = assemble(dom, 2.0)
leb = MeasureSpec.from_density("constant", 1.0)
g = Nonlinearity.power(1.0)
sol = solve_singular(op, discretize(leb, dom), g)

cfg = WalkConfig(dt=1e-4, n_paths=20_000, seed=1)
for label, u in (("solver", sol.u), ("solver x 1.1", 1.1 * sol.u)):
    rep = verify_solution_mc(u, op, g, leb, [0.25, 0.5, 0.75], cfg)
    zs = ", ".join(f"{r['z']:.2f}" for r in rep["rows"])
    print(f"{label:13s} z=[{zs}]  passed={rep['passed']}")
