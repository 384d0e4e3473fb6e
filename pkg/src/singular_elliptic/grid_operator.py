"""Discrete Dirichlet operator for the fractional Laplacian on an interval.

The operator acts on interior node values; everything outside the open
interval is held at zero. For ``alpha == 2`` this is the three point
stencil for ``-u''``. For ``alpha < 2`` it is the singular integral

    (-Delta)^{alpha/2} u(x) = C(1, alpha) * int (u(x) - u(x + y)) / |y|^{1+alpha} dy

discretised with cell-integrated weights, a Taylor correction for the
cell around ``y = 0`` and the exterior tail folded into the diagonal.
The resulting matrix is a symmetric M-matrix, so the discrete maximum
and comparison principles hold exactly.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln

from .errors import NumericError, ParameterError, ShapeError

__all__ = [
    "Domain",
    "DirichletOperator",
    "assemble",
    "apply",
    "solve_linear",
    "energy",
    "resolvent",
    "fractional_constant",
    "getoor_constant",
    "MAX_NODES",
]

MAX_NODES = 4096


@dataclass(frozen=True)
class Domain:
    """Uniform grid on ``(a, b)`` with ``n_interior`` interior nodes."""

    a: float
    b: float
    n_interior: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise ParameterError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.n_interior) != self.n_interior or self.n_interior < 1:
            raise ParameterError(f"n_interior must be a positive integer, got {self.n_interior}")
        object.__setattr__(self, "n_interior", int(self.n_interior))

    @property
    def h(self):
        return (self.b - self.a) / (self.n_interior + 1)

    @property
    def nodes(self):
        """Interior node coordinates ``a + i*h`` for ``i = 1..n_interior``."""
        return self.a + self.h * np.arange(1, self.n_interior + 1)

    def nearest_node(self, x):
        """Index (0-based) of the interior node closest to ``x``."""
        i = int(np.rint((x - self.a) / self.h)) - 1
        return min(max(i, 0), self.n_interior - 1)


def _check_alpha(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    return alpha


def fractional_constant(alpha):
    """``C(1, alpha) = 2^a Gamma((1+a)/2) / (sqrt(pi) |Gamma(-a/2)|)``.

    Evaluated through log-Gamma; tends to zero like ``2 - alpha``.
    """
    alpha = _check_alpha(alpha)
    if alpha == 2.0:
        return 0.0
    logc = alpha * np.log(2.0) + gammaln((1.0 + alpha) / 2.0) - 0.5 * np.log(np.pi) - gammaln(-alpha / 2.0)
    return float(np.exp(logc))


def getoor_constant(alpha):
    """Constant ``B_alpha`` with ``(-Delta)^{a/2} (r^2 - x^2)_+^{a/2} = B_alpha`` in one dimension."""
    alpha = _check_alpha(alpha)
    logb = alpha * np.log(2.0) + gammaln(1.0 + alpha / 2.0) + gammaln((1.0 + alpha) / 2.0) - gammaln(0.5)
    return float(np.exp(logb))


def _stable_weights(n, h, alpha):
    """Per-offset weights ``W_k`` (k = 0..n) and the Taylor correction.

    ``W_k`` integrates ``|y|^{-1-alpha}`` over the cell of offset ``k``;
    ``corr`` accounts for ``(0, h/2)`` via the local second difference.
    """
    k = np.arange(n + 1, dtype=float)
    w = np.zeros(n + 1)
    lo = (k[1:] - 0.5) * h
    hi = (k[1:] + 0.5) * h
    w[1:] = (lo ** -alpha - hi ** -alpha) / alpha
    corr = (0.5 * h) ** (2.0 - alpha) / ((2.0 - alpha) * h * h)
    w[1] += corr
    return w, corr


@dataclass(frozen=True, eq=False)
class DirichletOperator:
    """Symmetric M-matrix ``L`` discretising ``(-Delta)^{alpha/2}`` with zero exterior data.

    The matrix is read-only once assembled. Factorisations are cached on
    first use.
    """

    domain: Domain
    alpha: float
    L: np.ndarray = field(repr=False)
    killing: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.domain.n_interior

    @property
    def h(self):
        return self.domain.h

    @property
    def is_local(self):
        return self.alpha == 2.0

    @cached_property
    def _banded(self):
        # upper form for solveh_banded
        ab = np.zeros((2, self.n))
        ab[0, 1:] = np.diag(self.L, 1)
        ab[1] = np.diag(self.L)
        return ab

    @cached_property
    def _cholesky(self):
        try:
            return sla.cho_factor(self.L, lower=False, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericError("Cholesky factorisation failed", condition=np.linalg.cond(self.L)) from exc

    @cached_property
    def green_row_sum_max(self):
        """Max row sum of ``L^{-1} / h`` (discrete Green operator on node masses)."""
        g = self.solve(np.ones(self.n)) if self.n else np.zeros(0)
        return float(np.max(g))

    def matvec(self, u):
        if self.is_local:
            out = self.L.diagonal() * u
            out[:-1] += np.diag(self.L, 1) * u[1:]
            out[1:] += np.diag(self.L, -1) * u[:-1]
            return out
        return self.L @ u

    def solve(self, rhs, shift=None):
        """Solve ``(L + diag(shift)) v = rhs`` with one refinement step."""
        rhs = np.asarray(rhs, dtype=float)
        if shift is None:
            v = self._solve_raw(rhs)
            r = rhs - self.matvec(v)
            v = v + self._solve_raw(r)
            return v
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.n,))
        if self.is_local:
            ab = self._banded.copy()
            ab[1] += shift
            v = sla.solveh_banded(ab, rhs, check_finite=False)
            r = rhs - self.matvec(v) - shift * v
            return v + sla.solveh_banded(ab, r, check_finite=False)
        a = self.L + np.diag(shift)
        c = sla.cho_factor(a, check_finite=False)
        v = sla.cho_solve(c, rhs, check_finite=False)
        r = rhs - a @ v
        return v + sla.cho_solve(c, r, check_finite=False)

    def _solve_raw(self, rhs):
        if self.is_local:
            return sla.solveh_banded(self._banded, rhs, check_finite=False)
        return sla.cho_solve(self._cholesky, rhs, check_finite=False)


def assemble(domain, alpha):
    """Assemble the discrete operator for ``(-Delta)^{alpha/2}`` on ``domain``."""
    alpha = _check_alpha(alpha)
    n, h = domain.n_interior, domain.h
    if n > MAX_NODES:
        raise ParameterError(f"dense storage limited to {MAX_NODES} nodes, got {n}")
    if alpha == 2.0:
        L = (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)) / h**2
        killing = np.zeros(n)
        killing[0] += 1.0 / h**2
        killing[-1] += 1.0 / h**2
    else:
        c = fractional_constant(alpha)
        w, corr = _stable_weights(n, h, alpha)
        L = -c * sla.toeplitz(w[:n])
        i = np.arange(1, n + 1)
        # exterior cells start at offset K = distance (in nodes) to the boundary node
        k_right = (n + 1 - i).astype(float)
        k_left = i.astype(float)
        tails = (((k_right - 0.5) * h) ** -alpha + ((k_left - 0.5) * h) ** -alpha) / alpha
        tails = tails + corr * ((k_right == 1).astype(float) + (k_left == 1).astype(float))
        killing = c * tails
        offdiag_sum = -(L.sum(axis=1))  # diagonal of L is still zero here
        L[np.diag_indices(n)] = offdiag_sum + killing
    L.setflags(write=False)
    killing.setflags(write=False)
    return DirichletOperator(domain=domain, alpha=alpha, L=L, killing=killing)


def _as_vector(op, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (op.n,):
        raise ShapeError(f"expected vector of length {op.n}, got shape {u.shape}")
    return u


def apply(op, u):
    """Return ``L @ u``."""
    return op.matvec(_as_vector(op, u))


def energy(op, u):
    """Discrete Dirichlet energy ``h * u^T L u``."""
    u = _as_vector(op, u)
    return float(op.h * u @ op.matvec(u))


def solve_linear(op, mu, *, check=True):
    """Potential of a grid measure: solve ``L u = masses / h``.

    ``mu`` is a :class:`~singular_elliptic.measures.GridMeasure` or a raw
    vector of node masses. Returns the interior node vector ``u``.
    """
    masses = getattr(mu, "masses", mu)
    q = _as_vector(op, masses) / op.h
    if not np.any(q):
        return np.zeros(op.n)
    u = op.solve(q)
    if check:
        _check_residual(op, u, q)
    return u


def _check_residual(op, u, q, shift=None):
    r = op.matvec(u) - q
    if shift is not None:
        r = r + shift * u
    scale = np.max(np.abs(q))
    res = np.max(np.abs(r))
    # the matvec itself cannot be evaluated more accurately than this
    floor = 64 * np.finfo(float).eps * np.max(np.abs(op.L) @ np.abs(u))
    if not np.isfinite(res) or res > max(1e-10 * scale, floor):
        raise NumericError(
            f"linear solve residual {res:.3e} exceeds 1e-10 * {scale:.3e}",
            condition=float(np.linalg.cond(op.L)),
        )


def resolvent(op, beta, f):
    """Solve ``(L + beta I) v = f`` for ``beta >= 0``."""
    beta = float(beta)
    if beta < 0 or not np.isfinite(beta):
        raise ParameterError(f"beta must be >= 0, got {beta}")
    f = _as_vector(op, f)
    if not np.any(f):
        return np.zeros(op.n)
    if beta == 0.0:
        v = op.solve(f)
        _check_residual(op, v, f)
        return v
    v = op.solve(f, shift=np.full(op.n, beta))
    _check_residual(op, v, f, shift=beta)
    return v
