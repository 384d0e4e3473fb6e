"""
How the fractional order shapes the solution
============================================

Same data and nonlinearity, different orders. Lower orders give flatter
profiles with steeper boundary layers.
"""

from singular_elliptic import Domain, MeasureSpec, Nonlinearity, assemble, discretize, solve_singular

dom = Domain(0.0, 1.0, 255)
mu = discretize(MeasureSpec.from_density("constant", 1.0), dom)
g = Nonlinearity.power(1.0)

for alpha in (0.5, 1.0, 1.5, 2.0):
    u = solve_singular(assemble(dom, alpha), mu, g).u
    edge = u[dom.nearest_node(0.05)]
    print(f"alpha={alpha:.1f}  max u={u.max():.4f}  u(0.05)/max={edge / u.max():.3f}")
