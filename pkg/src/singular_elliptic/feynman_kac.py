"""Monte Carlo estimates of occupation integrals for killed stable processes.

The process has generator ``-(-Delta)^{alpha/2}``: Gaussian increments of
variance ``2 dt`` for ``alpha = 2`` and ``dt^{1/alpha}``-scaled symmetric
stable increments otherwise. It is killed when it leaves the interval.
``sample_occupation`` estimates ``E_x int_0^zeta f(X_t) dt`` (the
potential of ``f dx``); ``verify_solution_mc`` plugs a computed solution
into the right-hand side of the probabilistic solution identity and
compares with the solution itself.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import _walk
from .errors import ParameterError, UnsupportedMeasureError
from .measures import MeasureSpec, density

__all__ = [
    "WalkConfig",
    "Estimate",
    "merge_estimates",
    "sample_occupation",
    "verify_solution_mc",
    "occupation_paths",
    "TABLE_CELLS",
]

TABLE_CELLS = 2**16


@dataclass(frozen=True)
class WalkConfig:
    dt: float = 1e-5
    n_paths: int = 200_000
    batch: int = 10_000
    seed: int = 0
    max_steps: int = 10_000_000
    # batches run on this many threads; the kernel releases the GIL
    workers: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.n_paths < 2 or self.batch < 1 or self.max_steps < 1 or self.workers < 1:
            raise ParameterError("n_paths >= 2 and batch, max_steps, workers >= 1 required")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    timeout_fraction: float = 0.0
    m2: float = 0.0
    n_timeout: int = 0

    @property
    def valid(self):
        return self.timeout_fraction < 0.01

    @classmethod
    def from_values(cls, values, n_timeout=0):
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return cls(0.0, 0.0, 0, 1.0 if n_timeout else 0.0, 0.0, n_timeout)
        mean = float(values.mean())
        m2 = float(((values - mean) ** 2).sum())
        return cls._build(n, mean, m2, n_timeout)

    @classmethod
    def _build(cls, n, mean, m2, n_timeout):
        stderr = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
        total = n + n_timeout
        return cls(mean, stderr, n, n_timeout / total if total else 0.0, m2, n_timeout)

    def merge(self, other):
        """Pairwise combination of two sample summaries."""
        n = self.n_samples + other.n_samples
        if n == 0:
            return Estimate._build(0, 0.0, 0.0, self.n_timeout + other.n_timeout)
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n_samples / n
        m2 = self.m2 + other.m2 + delta * delta * self.n_samples * other.n_samples / n
        return Estimate._build(n, mean, m2, self.n_timeout + other.n_timeout)


def merge_estimates(estimates):
    """Fold batch summaries in the given order."""
    it = iter(estimates)
    acc = next(it)
    for e in it:
        acc = acc.merge(e)
    return acc


def _cell_midpoints(a, b, cells=TABLE_CELLS):
    return a + (np.arange(cells) + 0.5) * (b - a) / cells


def _density_fn(f):
    if isinstance(f, MeasureSpec):
        if f.atoms and f.atom_mass > 0:
            raise UnsupportedMeasureError("atoms have no occupation-time functional here")
        return f.density_values
    if isinstance(f, str):
        return lambda x: density(f, (), x)
    if isinstance(f, tuple):
        return lambda x: density(f[0], f[1], x)
    if callable(f):
        return f
    raise ParameterError(f"cannot interpret {f!r} as a density")


def occupation_paths(alpha, a, b, x, table, cfg, first=0, count=None):
    """Per-path integrals and timeout flags for paths ``first .. first+count-1``."""
    count = cfg.n_paths if count is None else count
    out = np.zeros(count)
    timed_out = np.zeros(count, dtype=np.bool_)
    _walk.run_paths(np.uint64(cfg.seed), np.uint64(first), count, float(x), float(a), float(b), float(alpha),
                    float(cfg.dt), int(cfg.max_steps), np.ascontiguousarray(table, dtype=float), out, timed_out,
                    _walk.ZIG_KN, _walk.ZIG_WN, _walk.ZIG_FN)
    return out, timed_out


def _estimate(alpha, a, b, x, table, cfg):
    def batch(first):
        count = min(cfg.batch, cfg.n_paths - first)
        vals, timed_out = occupation_paths(alpha, a, b, x, table, cfg, first, count)
        return Estimate.from_values(vals[~timed_out], int(timed_out.sum()))

    starts = range(0, cfg.n_paths, cfg.batch)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            batches = list(ex.map(batch, starts))
    else:
        batches = [batch(first) for first in starts]
    # fold in batch-index order so the result does not depend on scheduling
    return merge_estimates(batches)


def _check_walk(alpha, domain, x, cfg):
    alpha = float(alpha)
    if not (0 < alpha <= 2):
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if not (domain.a < x < domain.b):
        raise ParameterError(f"start point {x} not inside ({domain.a}, {domain.b})")
    if cfg.dt ** (1.0 / alpha) >= 0.5 * (domain.b - domain.a):
        raise ParameterError(f"dt={cfg.dt} is degenerate: one step spans half the interval")
    return alpha


def sample_occupation(alpha, domain, x, f, cfg=WalkConfig()):
    """Estimate ``E_x int_0^zeta f(X_t) dt`` for a bounded density ``f``."""
    alpha = _check_walk(alpha, domain, x, cfg)
    table = _density_fn(f)(_cell_midpoints(domain.a, domain.b))
    if not np.any(table):
        return Estimate(0.0, 0.0, cfg.n_paths)
    return _estimate(alpha, domain.a, domain.b, x, table, cfg)


def _interp_solution(domain, u, y):
    xs = np.concatenate(([domain.a], domain.nodes, [domain.b]))
    us = np.concatenate(([0.0], np.asarray(u, dtype=float), [0.0]))
    return np.interp(y, xs, us)


def verify_solution_mc(u, op, g, f_density, points, cfg=WalkConfig(), allowance=None):
    """Compare ``u(x)`` with ``E_x int_0^zeta g(u)(X_t) f(X_t) dt`` at each point.

    ``u`` is frozen: piecewise linear between nodes (zero on the boundary)
    and ``g`` is applied to the interpolant. ``allowance`` (absolute,
    default ``2 sqrt(dt) * u(x)``) covers the time-stepping and grid
    discretization; ``z = |u(x) - mean| / (stderr + allowance)`` must not
    exceed 3.
    """
    if isinstance(f_density, MeasureSpec) and f_density.atom_mass > 0:
        raise UnsupportedMeasureError("verification supports density measures only")
    dom = op.domain
    values = np.asarray(getattr(u, "u", u), dtype=float)
    y = _cell_midpoints(dom.a, dom.b)
    uy = _interp_solution(dom, values, y)
    fy = _density_fn(f_density)(y)
    table = np.where(fy != 0, g(np.where(uy > 0, uy, 1.0)) * fy, 0.0)
    rows = []
    for x in points:
        _check_walk(op.alpha, dom, x, cfg)
        est = _estimate(op.alpha, dom.a, dom.b, x, table, cfg)
        ux = float(_interp_solution(dom, values, x))
        allow = 2.0 * math.sqrt(cfg.dt) * ux if allowance is None else float(allowance)
        z = abs(ux - est.mean) / (est.stderr + allow) if (est.stderr + allow) > 0 else math.inf
        rows.append({
            "x": float(x),
            "u_deterministic": ux,
            "mc_mean": est.mean,
            "mc_stderr": est.stderr,
            "z": z,
            "timeout_fraction": est.timeout_fraction,
            "allowance": allow,
            "valid": est.valid,
        })
    passed = all(r["z"] <= 3.0 and r["valid"] for r in rows)
    return {"rows": rows, "passed": passed}
