"""Stability experiments for the singular problem under measure perturbations.

Convergence of additive functionals is measured through sup-norm
distances of potentials. Convergence ``m``-a.e. of solutions is measured
in a trimmed sup norm that ignores a fixed neighbourhood of every atom:
near a polar atom the mollified solutions develop a spike whose height
grows as ``epsilon`` shrinks, while they converge uniformly on every set
kept away from the atom.

Verdicts are trend rules over a finite refinement schedule.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import grid_operator as go
from .errors import ParameterError, ResolutionError, ShapeError
from .measures import MeasureSpec, atoms_are_concentrated, decompose, discretize, mollify, tv_norm
from .semilinear import SolverConfig, solve_singular

__all__ = [
    "RefinementSchedule",
    "StabilityReport",
    "potential_sup_distance",
    "green_row_sum_max",
    "run_tv_stability",
    "run_vanishing",
    "run_mollification_split",
    "run_additive_perturbation",
    "trimmed_mask",
    "strictly_decreasing",
    "DEFAULT_EXCLUSION_RADIUS",
]

DEFAULT_EXCLUSION_RADIUS = 0.1
CSV_COLUMNS = ("level", "N", "epsilon", "distance", "max_u", "verdict")


@dataclass(frozen=True)
class RefinementSchedule:
    """Pairs ``(N, epsilon)`` with ``N`` increasing, ``epsilon`` decreasing and ``epsilon >= 4h``."""

    pairs: tuple
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        pairs = tuple((int(n), float(e)) for n, e in self.pairs)
        if not pairs:
            raise ParameterError("empty refinement schedule")
        for (n0, e0), (n1, e1) in zip(pairs, pairs[1:]):
            if not (n1 > n0 and e1 < e0):
                raise ParameterError(f"schedule must refine N and shrink epsilon: {pairs}")
        for n, e in pairs:
            h = (self.b - self.a) / (n + 1)
            if e < 4 * h - 1e-14:
                raise ResolutionError(f"schedule level N={n}: epsilon={e} < 4h={4 * h}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def domain(self, n):
        return go.Domain(self.a, self.b, n)

    @classmethod
    def power_law(cls, sizes, eps0, exponent=1.0, a=0.0, b=1.0):
        """``epsilon_k = eps0 * (h_k / h_0) ** exponent``."""
        h0 = (b - a) / (sizes[0] + 1)
        pairs = [(n, eps0 * (((b - a) / (n + 1)) / h0) ** exponent) for n in sizes]
        return cls(tuple(pairs), a, b)


@dataclass
class StabilityReport:
    kind: str
    rows: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(bool(v) for v in self.verdicts.values() if isinstance(v, (bool, np.bool_)))

    @property
    def distances(self):
        return [r["distance"] for r in self.rows]

    @property
    def max_values(self):
        return [r["max_u"] for r in self.rows]

    def csv_rows(self):
        return [tuple(r.get(c, "") for c in CSV_COLUMNS) for r in self.rows]


@lru_cache(maxsize=8)
def _operator(alpha, a, b, n):
    return go.assemble(go.Domain(a, b, n), alpha)


def _masses(m):
    return np.asarray(getattr(m, "masses", m), dtype=float)


def potential_sup_distance(op, mu1, mu2):
    """``||R mu1 - R mu2||_inf``, computed as the potential of the signed difference."""
    m1, m2 = _masses(mu1), _masses(mu2)
    if m1.shape != (op.n,) or m2.shape != (op.n,):
        raise ShapeError("measures must live on the operator grid")
    diff = m1 - m2
    if not np.any(diff):
        return 0.0
    return float(np.max(np.abs(go.solve_linear(op, diff))))


def green_row_sum_max(op):
    """Max row sum of the discrete Green matrix ``G = L^{-1} / h`` acting on node masses."""
    return float(np.max(op.solve(np.ones(op.n)))) / op.h


def strictly_decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


def trimmed_mask(domain, atoms, radius):
    """Nodes at distance >= ``radius`` from every atom location."""
    x = domain.nodes
    keep = np.ones(x.size, dtype=bool)
    for xa, m in atoms:
        if m > 0:
            keep &= np.abs(x - xa) >= radius
    return keep


def _full_levels(cfg):
    return cfg.up_to(cfg.levels[-1]) if cfg.early_stop else cfg


def _map_levels(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def run_tv_stability(op, g, mu, perturbations, cfg=SolverConfig()):
    """Solutions for measures converging in total variation.

    Passes when ``||u_n - u||_inf`` is nonincreasing after the first term
    and the final distance is at most ``10 * ||mu_n - mu||_TV * s`` with
    ``s = ||R mu||_inf / ||mu||_TV``.
    """
    cfg = _full_levels(cfg)
    base = solve_singular(op, mu, g, cfg)
    rmu = float(np.max(go.solve_linear(op, mu)))
    scale = rmu / tv_norm(mu)
    report = StabilityReport("tv", params={"potential_scale": scale})
    for k, mun in enumerate(perturbations, start=1):
        m = _masses(mun)
        if np.any(m < 0) or not np.any(m > 0):
            raise ParameterError("perturbations must be nonnegative and nontrivial")
        un = solve_singular(op, mun, g, cfg)
        report.rows.append({
            "level": k,
            "N": op.n,
            "epsilon": "",
            "distance": float(np.max(np.abs(un.u - base.u))),
            "tv_distance": tv_norm(m - _masses(mu)),
            "potential_distance": potential_sup_distance(op, mun, mu),
            "max_u": un.max,
            "u": un.u,
        })
    d = report.distances
    tv_final = report.rows[-1]["tv_distance"] if report.rows else 0.0
    report.verdicts = {
        "nonincreasing": all(b <= a for a, b in zip(d[1:], d[2:])),
        "final_within_tv_scale": bool(d[-1] <= 10 * tv_final * scale) if d else True,
    }
    report.params["base_u"] = base.u
    for r in report.rows:
        r["verdict"] = "pass" if report.passed else "fail"
    return report


def _level_solution(alpha, schedule, g, data_fn, cfg):
    def run(level):
        n, eps = level
        dom = schedule.domain(n)
        op = _operator(alpha, schedule.a, schedule.b, n)
        return dom, solve_singular(op, data_fn(dom, eps), g, cfg)

    return run


def run_vanishing(alpha, g, atom_spec, schedule, cfg=SolverConfig(), exclusion_radius=DEFAULT_EXCLUSION_RADIUS,
                  min_levels=4, ratio=0.5, workers=1):
    """Mollified purely atomic data: do the solutions vanish away from the atoms?

    Verdict ``"vanishing"`` when the trimmed maximum strictly decreases
    over at least ``min_levels`` levels and ends below ``ratio`` times its
    first value, ``"not vanishing"`` otherwise.
    """
    if atom_spec.densities:
        raise ParameterError("vanishing experiment needs purely atomic data")
    if atom_spec.atom_mass == 0:
        raise ParameterError("equation data must be a nontrivial measure")
    run = _level_solution(alpha, schedule, g, lambda dom, eps: mollify(atom_spec, eps, dom), cfg)
    results = _map_levels(run, list(schedule), workers)
    report = StabilityReport("vanishing", params={
        "alpha": alpha, "exclusion_radius": exclusion_radius, "atoms_concentrated": atoms_are_concentrated(alpha)})
    for k, ((n, eps), (dom, sol)) in enumerate(zip(schedule, results), start=1):
        keep = trimmed_mask(dom, atom_spec.atoms, exclusion_radius)
        trimmed = float(np.max(sol.u[keep]))
        report.rows.append({"level": k, "N": n, "epsilon": eps, "distance": trimmed, "max_u": trimmed,
                            "max_u_untrimmed": sol.max})
    m = report.max_values
    decreasing = len(m) >= min_levels and strictly_decreasing(m)
    halved = bool(m[-1] < ratio * m[0])
    vanishing = decreasing and halved
    report.verdicts = {"strictly_decreasing": decreasing, "halved": halved}
    report.params["verdict"] = "vanishing" if vanishing else "not vanishing"
    for r in report.rows:
        r["verdict"] = report.params["verdict"]
    return report


def _trimmed_distance(dom, u, ref_dom, ref_u, atoms, radius):
    xr = np.concatenate(([ref_dom.a], ref_dom.nodes, [ref_dom.b]))
    ur = np.concatenate(([0.0], ref_u, [0.0]))
    ref_here = np.interp(dom.nodes, xr, ur)
    keep = trimmed_mask(dom, atoms, radius)
    return float(np.max(np.abs(u - ref_here)[keep]))


def _distance_report(kind, alpha, schedule, results, ref_dom, ref_u, atoms, radius, min_levels):
    report = StabilityReport(kind, params={"alpha": alpha, "exclusion_radius": radius})
    for k, ((n, eps), (dom, sol)) in enumerate(zip(schedule, results), start=1):
        dist = _trimmed_distance(dom, sol.u, ref_dom, ref_u, atoms, radius)
        report.rows.append({"level": k, "N": n, "epsilon": eps, "distance": dist, "max_u": sol.max})
    d = report.distances
    ok = len(d) >= min_levels and strictly_decreasing(d)
    report.verdicts = {"strictly_decreasing": ok}
    for r in report.rows:
        r["verdict"] = "pass" if ok else "fail"
    report.params["reference_max"] = float(np.max(ref_u))
    return report


def run_mollification_split(alpha, g, mixed_spec, schedule, cfg=SolverConfig(),
                            exclusion_radius=DEFAULT_EXCLUSION_RADIUS, min_levels=4, workers=1):
    """Mollified data ``j_eps * mu`` against the diffuse-part solution.

    The reference solves ``-A u = g(u) mu_d`` on the finest grid of the
    schedule; each level's solution is compared with it in the trimmed
    sup norm.
    """
    if mixed_spec.is_trivial() or not mixed_spec.densities:
        raise ParameterError("split experiment needs a nontrivial density part")
    diffuse, _ = decompose(mixed_spec, alpha)
    n_ref = schedule.pairs[-1][0]
    ref_dom = schedule.domain(n_ref)
    ref = solve_singular(_operator(alpha, schedule.a, schedule.b, n_ref), discretize(diffuse, ref_dom), g, cfg)
    run = _level_solution(alpha, schedule, g, lambda dom, eps: mollify(mixed_spec, eps, dom), cfg)
    results = _map_levels(run, list(schedule), workers)
    report = _distance_report("mollification_split", alpha, schedule, results, ref_dom, ref.u, mixed_spec.atoms,
                              exclusion_radius, min_levels)
    report.params["atoms_concentrated"] = atoms_are_concentrated(alpha)
    return report


def run_additive_perturbation(alpha, g, nu_spec, singular_spec, schedule, cfg=SolverConfig(),
                              exclusion_radius=DEFAULT_EXCLUSION_RADIUS, min_levels=4, workers=1):
    """Diffuse data ``nu`` plus mollified singular terms against the ``nu``-only solution."""
    if not g.monotone:
        raise ParameterError("additive perturbation experiment needs nonincreasing g")
    if nu_spec.is_trivial():
        raise ParameterError("nu must be nontrivial")
    if decompose(nu_spec, alpha)[1].atom_mass > 0:
        raise ParameterError("nu must be diffuse")
    n_ref = schedule.pairs[-1][0]
    ref_dom = schedule.domain(n_ref)
    ref = solve_singular(_operator(alpha, schedule.a, schedule.b, n_ref), discretize(nu_spec, ref_dom), g, cfg)

    def data(dom, eps):
        nu = discretize(nu_spec, dom)
        if singular_spec.is_trivial():
            return nu
        return nu + mollify(singular_spec, eps, dom)

    run = _level_solution(alpha, schedule, g, data, cfg)
    results = _map_levels(run, list(schedule), workers)
    return _distance_report("additive_perturbation", alpha, schedule, results, ref_dom, ref.u,
                            singular_spec.atoms, exclusion_radius, min_levels)
