"""Semilinear equations with singular nonlinearities and measure data for
the fractional Laplacian on an interval.

The solver works on a uniform grid with zero exterior values and treats
``-(-Delta)^{alpha/2} u = g(u) mu`` for nonincreasing ``g`` that blows up
at zero, through the regularized problems with ``g(u + 1/n)``.
"""

from .capacity import capacity, point_capacity_refinement
from .config import RunConfig, load_config, parse_config
from .errors import (
    ConfigError,
    NonConvergenceError,
    NumericError,
    ParameterError,
    ResolutionError,
    ShapeError,
    SingularEllipticError,
    UnsupportedMeasureError,
)
from .feynman_kac import Estimate, WalkConfig, merge_estimates, sample_occupation, verify_solution_mc
from .grid_operator import (
    DirichletOperator,
    Domain,
    apply,
    assemble,
    energy,
    fractional_constant,
    getoor_constant,
    resolvent,
    solve_linear,
)
from .measures import (
    GridMeasure,
    MeasureSpec,
    Mollifier,
    atoms_are_concentrated,
    decompose,
    discretize,
    mollify,
    tv_norm,
)
from .nonlinearity import Nonlinearity, SumNonlinearity
from .semilinear import (
    Solution,
    SolverConfig,
    comparison_check,
    power_bracket,
    solve_mixed,
    solve_regularized,
    solve_singular,
    verify_energy_bound,
    verify_sup_bound,
)
from .stability import (
    RefinementSchedule,
    StabilityReport,
    potential_sup_distance,
    run_additive_perturbation,
    run_mollification_split,
    run_tv_stability,
    run_vanishing,
)

__version__ = "0.1.0"
