"""Discrete capacities from equilibrium potentials.

The equilibrium potential of a node set ``K`` equals 1 on ``K`` and is
discretely harmonic (``L e = 0``) on the remaining interior nodes; the
capacity is its energy ``h e^T L e``. This is the order-0 capacity of the
transient form, which has the same null sets as the 1-capacity.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .grid_operator import Domain, assemble, energy

__all__ = ["CapacityResult", "capacity", "point_capacity_refinement"]


@dataclass
class CapacityResult:
    value: float
    equilibrium: np.ndarray


def _solve_complement(op, comp, rhs):
    if op.is_local:
        sub = op.L[np.ix_(comp, comp)]
        ab = np.zeros((2, comp.size))
        ab[0, 1:] = np.diag(sub, 1)
        ab[1] = np.diag(sub)
        return sla.solveh_banded(ab, rhs, check_finite=False)
    return sla.solve(op.L[np.ix_(comp, comp)], rhs, assume_a="pos", check_finite=False)


def capacity(op, K):
    """Capacity of the node-index set ``K`` (0-based) for operator ``op``.

    An empty ``K`` has capacity 0 and a zero potential.
    """
    K = np.unique(np.asarray(list(K), dtype=int))
    e = np.zeros(op.n)
    if K.size == 0:
        return CapacityResult(0.0, e)
    if K[0] < 0 or K[-1] >= op.n:
        raise IndexError(f"node indices must lie in [0, {op.n})")
    e[K] = 1.0
    comp = np.setdiff1d(np.arange(op.n), K)
    if comp.size:
        rhs = -op.L[np.ix_(comp, K)].sum(axis=1)
        e[comp] = _solve_complement(op, comp, rhs)
    return CapacityResult(energy(op, e), e)


def point_capacity_refinement(alpha, x0, sizes, a=0.0, b=1.0):
    """Capacity of the node nearest ``x0`` on successively finer grids.

    Returns a list of ``(N, value)``. The values tend to zero when points
    are polar (``alpha <= 1``) and to a positive limit otherwise.
    """
    out = []
    for n in sizes:
        dom = Domain(a, b, int(n))
        op = assemble(dom, alpha)
        out.append((int(n), capacity(op, [dom.nearest_node(x0)]).value))
    return out
