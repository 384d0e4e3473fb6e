"""Regularize-then-limit solver for ``-A u = g(u) mu`` with singular ``g``.

For each regularization level ``n`` the problem ``L u = g(u + 1/n) q``
(``q`` = node density of ``mu``) is solved to a tight residual. Levels
are visited in increasing order and the solution is accepted once the
sup-norm difference between consecutive levels drops below the outer
tolerance. For nonincreasing ``g`` the level solutions increase with
``n`` and each one is a subsolution for the next, so it is used as the
starting point.

The inner solver for nonincreasing ``g`` is Newton's method: the
Jacobian ``L + diag(-g'(u + 1/n) q)`` is an M-matrix, and starting from a
subsolution the iterates increase monotonically when ``g`` is convex.
The Picard map ``T(u) = L^{-1} (g(u + 1/n) q)`` is antitone, so ``u`` and
``T(u)`` bracket the fixed point; their distance is reported as the
bracket gap. Non-monotone ``g`` uses damped Picard iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import grid_operator as go
from .errors import NonConvergenceError, ParameterError, ShapeError
from .measures import tv_norm
from .nonlinearity import Nonlinearity, SumNonlinearity

__all__ = [
    "SolverConfig",
    "Solution",
    "solve_regularized",
    "solve_singular",
    "power_bracket",
    "solve_mixed",
    "comparison_check",
    "verify_sup_bound",
    "verify_energy_bound",
    "picard_map",
]

DEFAULT_LEVELS = tuple(2**k for k in range(25))


@dataclass(frozen=True)
class SolverConfig:
    inner_tol: float = 1e-10
    max_inner_iters: int = 200
    levels: tuple = DEFAULT_LEVELS
    outer_tol: float = 1e-6
    # outer_tol is multiplied by max(u) when True
    outer_relative: bool = True
    # run every level even after the Cauchy test passes
    early_stop: bool = True
    method: str = "newton"

    def __post_init__(self):
        if not (self.inner_tol > 0 and self.outer_tol > 0):
            raise ParameterError("tolerances must be positive")
        if self.max_inner_iters < 1:
            raise ParameterError("max_inner_iters must be >= 1")
        levels = tuple(int(n) for n in self.levels)
        if not levels or levels[0] < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ParameterError(f"levels must be strictly increasing positive integers, got {self.levels}")
        if self.method not in ("newton", "picard"):
            raise ParameterError(f"unknown method {self.method!r}")
        object.__setattr__(self, "levels", levels)

    def up_to(self, n):
        """Same config with levels truncated at ``n`` and every level run."""
        return SolverConfig(self.inner_tol, self.max_inner_iters, tuple(k for k in self.levels if k <= n),
                            self.outer_tol, self.outer_relative, False, self.method)


@dataclass
class Solution:
    u: np.ndarray
    residual: float
    bracket_gap: float
    n_last: int
    level_trace: list = field(default_factory=list)
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def max(self):
        return float(np.max(self.u))


def _density(op, mu):
    q = np.asarray(getattr(mu, "masses", mu), dtype=float)
    if q.shape != (op.n,):
        raise ShapeError(f"measure has {q.size} nodes, operator has {op.n}")
    if np.any(q < 0):
        raise ParameterError("equation data must be a nonnegative measure")
    if not np.any(q > 0):
        raise ParameterError("equation data must be a nontrivial measure")
    return q / op.h


def _abs_matvec(op, u):
    if op.is_local:
        d = np.abs(op.L.diagonal()) * np.abs(u)
        off = np.abs(np.diag(op.L, 1))
        d[:-1] += off * np.abs(u[1:])
        d[1:] += off * np.abs(u[:-1])
        return d
    return np.abs(op.L) @ np.abs(u)


def _roundoff_floor(op, u):
    return 64 * np.finfo(float).eps * float(np.max(_abs_matvec(op, u)))


def picard_map(op, g, u, q, shift):
    """``T(u) = L^{-1} (g(u + shift) q)``."""
    return op.solve(g(u + shift) * q)


def _residual(op, g, u, q, shift):
    return float(np.max(np.abs(op.matvec(u) - g(u + shift) * q)))


def solve_regularized(op, mu, g, n, cfg=SolverConfig(), u0=None):
    """Solve ``L u = g(u + 1/n) q`` for one regularization level ``n``."""
    q = _density(op, mu)
    n = int(n)
    if n < 1:
        raise ParameterError("regularization level must be >= 1")
    shift = 1.0 / n
    u = np.zeros(op.n) if u0 is None else np.array(u0, dtype=float)
    if not g.monotone:
        return _damped_picard(op, g, q, shift, n, cfg, u)
    if cfg.method == "picard":
        return _antitone_picard(op, g, q, shift, n, cfg, u)
    return _newton(op, g, q, shift, n, cfg, u)


def _accept(op, g, u, q, shift, n, cfg, iterations, **diag):
    qmax = float(np.max(q))
    res = _residual(op, g, u, q, shift)
    tu = picard_map(op, g, u, q, shift)
    gap = float(np.max(np.abs(tu - u)))
    floor = _roundoff_floor(op, u)
    ok = res <= max(cfg.inner_tol * qmax, floor) and gap <= max(cfg.inner_tol, floor / qmax)
    if not ok:
        raise NonConvergenceError(
            f"level n={n}: residual {res / qmax:.3e} (relative), bracket gap {gap:.3e} after {iterations} iterations",
            gap=gap,
        )
    diag.setdefault("monotone", bool(g.monotone))
    return Solution(u=u, residual=res / qmax, bracket_gap=gap, n_last=n, iterations=iterations, diagnostics=diag)


def _newton(op, g, q, shift, n, cfg, u):
    qmax = float(np.max(q))
    best = np.inf
    stall = 0
    for k in range(1, cfg.max_inner_iters + 1):
        gv = g(u + shift)
        F = op.matvec(u) - gv * q
        res = float(np.max(np.abs(F)))
        floor = _roundoff_floor(op, u)
        if res <= max(1e-3 * cfg.inner_tol * qmax, floor):
            break
        if res >= best:
            stall += 1
            if stall >= 3 and res <= max(cfg.inner_tol * qmax, 4 * floor):
                break
        else:
            stall = 0
            best = res
        jac_shift = -g.derivative(u + shift) * q
        du = op.solve(-F, shift=jac_shift)
        t = 1.0
        # keep the regularized argument away from zero
        while np.any(u + t * du + shift <= 0.5 * shift) and t > 1e-12:
            t *= 0.5
        u = u + t * du
    else:
        k = cfg.max_inner_iters
    return _accept(op, g, u, q, shift, n, cfg, k, method="newton")


def _antitone_picard(op, g, q, shift, n, cfg, u):
    prev = u
    gap = np.inf
    for k in range(1, cfg.max_inner_iters + 1):
        nxt = picard_map(op, g, prev, q, shift)
        gap = float(np.max(np.abs(nxt - prev)))
        prev = nxt
        if gap <= 0.1 * cfg.inner_tol:
            break
    else:
        raise NonConvergenceError(f"level n={n}: antitone Picard gap {gap:.3e} after {k} iterations", gap=gap)
    return _accept(op, g, prev, q, shift, n, cfg, k, method="picard")


def _damped_picard(op, g, q, shift, n, cfg, u):
    theta = 1.0
    res = _residual(op, g, u, q, shift)
    iters = max(cfg.max_inner_iters, 20000)
    for k in range(1, iters + 1):
        tu = picard_map(op, g, u, q, shift)
        step = float(np.max(np.abs(tu - u)))
        # |g'| q can be large near the boundary, so the step must be well below the residual target
        if step <= 1e-3 * cfg.inner_tol:
            u = tu
            break
        cand = (1 - theta) * u + theta * tu
        res_c = _residual(op, g, cand, q, shift)
        if res_c > res and theta > 1e-3:
            theta *= 0.5
        u, res = cand, res_c
    else:
        raise NonConvergenceError(f"level n={n}: damped Picard did not converge", gap=step)
    return _accept(op, g, u, q, shift, n, cfg, k, method="damped_picard", theta=theta, possibly_non_unique=True)


def solve_singular(op, mu, g, cfg=SolverConfig()):
    """Limit of the regularized solutions as ``n`` runs through ``cfg.levels``."""
    _density(op, mu)
    trace = []
    prev = None
    nondecreasing = True
    sol = None
    for n in cfg.levels:
        sol = solve_regularized(op, mu, g, n, cfg, u0=prev)
        if prev is not None:
            diff = sol.u - prev
            trace.append(float(np.max(np.abs(diff))))
            nondecreasing &= bool(np.min(diff) >= -1e-10)
            tol = cfg.outer_tol * (np.max(sol.u) if cfg.outer_relative else 1.0)
            if cfg.early_stop and trace[-1] <= tol:
                break
        prev = sol.u
    sol.level_trace = trace
    sol.diagnostics["levels_nondecreasing"] = nondecreasing
    if not g.monotone:
        sol.diagnostics["possibly_non_unique"] = True
    tol = cfg.outer_tol * (np.max(sol.u) if cfg.outer_relative else 1.0)
    if len(cfg.levels) > 1 and not trace[-1] <= tol:
        raise NonConvergenceError(
            f"levels exhausted at n={sol.n_last}: last level difference {trace[-1]:.3e} > {tol:.3e}", trace=trace
        )
    return sol


def power_bracket(op, mu, gamma, c1, c2, cfg=SolverConfig()):
    """Solutions ``v`` and ``w`` of the pure-power problems with constants ``c1`` and ``c2``.

    Both runs use every level of ``cfg`` so they end at the same ``n``.
    """
    full = cfg.up_to(cfg.levels[-1])
    v = solve_singular(op, mu, Nonlinearity.power(gamma, c1), full)
    w = solve_singular(op, mu, Nonlinearity.power(gamma, c2), full)
    return v, w


def solve_mixed(op, mu, g, h, cfg=SolverConfig()):
    """Solve ``-A u = (g(u) + h(u)) mu`` and check the two-power upper bound.

    ``v`` and ``w`` solve the pure-power problems with the lower growth
    constant and exponents ``g.gamma`` and ``h.gamma``; the bound
    ``u <= (c2/c1) (2^gamma v + 2^beta w)`` is reported in diagnostics.
    """
    full = cfg.up_to(cfg.levels[-1])
    u = solve_singular(op, mu, SumNonlinearity(g, h), full)
    c1 = min(g.c1, h.c1)
    c2 = max(g.c2, h.c2)
    v = solve_singular(op, mu, Nonlinearity.power(g.gamma, c1), full)
    w = solve_singular(op, mu, Nonlinearity.power(h.gamma, c1), full)
    bound = (c2 / c1) * (2.0**g.gamma * v.u + 2.0**h.gamma * w.u)
    slack = bound - u.u
    u.diagnostics.update(
        bound=bound,
        bound_min_slack=float(np.min(slack)),
        bound_violation=float(max(0.0, -np.min(slack))),
        bound_holds=bool(np.min(slack) >= -1e-8),
    )
    return u


def _values(u):
    return np.asarray(getattr(u, "u", u), dtype=float)


def comparison_check(u1, u2, tol=1e-10):
    """Largest violation of ``u1 <= u2``; passes when it is at most ``tol``."""
    a, b = _values(u1), _values(u2)
    if a.shape != b.shape:
        raise ShapeError(f"grid mismatch: {a.shape} vs {b.shape}")
    violation = float(max(0.0, np.max(a - b)))
    return {"max_violation": violation, "passed": violation <= tol}


def verify_sup_bound(u, op, mu, gamma, c2):
    """Check ``max u <= (c2 (gamma + 1) max R mu)^{1/(gamma + 1)}``."""
    lhs = float(np.max(_values(u)))
    rmu = float(np.max(go.solve_linear(op, mu)))
    rhs = (c2 * (gamma + 1.0) * rmu) ** (1.0 / (gamma + 1.0))
    return {"max_u": lhs, "bound": rhs, "max_potential": rmu, "slack": rhs - lhs, "passed": lhs <= rhs + 1e-8}


def verify_energy_bound(u, op, mu, gamma, c2=1.0):
    """Ratio ``E(u^{(gamma+1)/2}) / (c2 ||mu||_TV)``; zero for the zero vector."""
    vals = np.clip(_values(u), 0.0, None)
    e = go.energy(op, vals ** ((gamma + 1.0) / 2.0))
    tv = tv_norm(mu)
    ratio = e / (c2 * tv) if tv > 0 else 0.0
    return {"energy": e, "tv": tv, "ratio": ratio}
