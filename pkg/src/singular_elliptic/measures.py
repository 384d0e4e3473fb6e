"""Measure data on the grid: densities, atoms, mollification, decomposition.

A :class:`MeasureSpec` describes a measure on the open interval as a sum
of registry densities (absolutely continuous part) and point masses.
:func:`discretize` and :func:`mollify` turn it into node masses.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ParameterError, ResolutionError

__all__ = [
    "DENSITIES",
    "MeasureSpec",
    "GridMeasure",
    "Mollifier",
    "density",
    "discretize",
    "mollify",
    "decompose",
    "tv_norm",
    "atoms_are_concentrated",
]


def _constant(x, value=1.0):
    return np.full_like(x, float(value), dtype=float)


def _bump(x, center=0.5, radius=0.25, height=1.0):
    t = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def _step(x, left=0.25, right=0.75, value=1.0):
    x = np.asarray(x, dtype=float)
    return np.where((x >= left) & (x <= right), float(value), 0.0)


def _hat(x, center=0.5, radius=0.25, height=1.0):
    x = np.asarray(x, dtype=float)
    return height * np.clip(1.0 - np.abs(x - center) / radius, 0.0, None)


# name -> (function, parameter names)
DENSITIES = {
    "constant": (_constant, ("value",)),
    "bump": (_bump, ("center", "radius", "height")),
    "step": (_step, ("left", "right", "value")),
    "hat": (_hat, ("center", "radius", "height")),
}


def density(density_id, params, x):
    """Evaluate registry density ``density_id`` with positional ``params`` at ``x``."""
    try:
        fn, names = DENSITIES[density_id]
    except KeyError:
        raise ParameterError(f"unknown density {density_id!r}; known: {sorted(DENSITIES)}") from None
    if len(params) > len(names):
        raise ParameterError(f"density {density_id!r} takes at most {len(names)} parameters")
    return fn(np.asarray(x, dtype=float), *params)


@dataclass(frozen=True)
class MeasureSpec:
    """Measure as a weighted sum of registry densities plus atoms.

    ``densities`` holds ``(density_id, params, weight)`` terms (a 2-tuple
    means weight 1) and ``atoms`` holds ``(location, mass)`` pairs.
    """

    densities: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        dens = []
        for term in self.densities:
            d, params, *rest = term
            weight = float(rest[0]) if rest else 1.0
            params = tuple(float(p) for p in params)
            if d not in DENSITIES:
                raise ParameterError(f"unknown density {d!r}; known: {sorted(DENSITIES)}")
            if len(params) > len(DENSITIES[d][1]):
                raise ParameterError(f"too many parameters for density {d!r}")
            if weight < 0 or not np.isfinite(weight):
                raise ParameterError(f"density weight must be finite and >= 0, got {weight}")
            dens.append((str(d), params, weight))
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        for x, m in atoms:
            if m < 0 or not np.isfinite(m):
                raise ParameterError(f"atom mass must be finite and >= 0, got {m}")
        object.__setattr__(self, "densities", tuple(dens))
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_density(cls, density_id, *params, atoms=()):
        return cls(densities=((density_id, params),), atoms=atoms)

    @classmethod
    def dirac(cls, x, mass=1.0):
        return cls(atoms=((x, mass),))

    def __add__(self, other):
        return MeasureSpec(self.densities + other.densities, self.atoms + other.atoms)

    def scaled(self, t):
        """Spec of ``t * mu`` for ``t >= 0``."""
        t = float(t)
        if t < 0:
            raise ParameterError("scale must be nonnegative")
        return MeasureSpec(tuple((d, p, w * t) for d, p, w in self.densities),
                           tuple((x, m * t) for x, m in self.atoms))

    @property
    def density_part(self):
        return MeasureSpec(self.densities, ())

    @property
    def atom_part(self):
        return MeasureSpec((), self.atoms)

    @property
    def atom_mass(self):
        return sum(m for _, m in self.atoms)

    def density_values(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for d, params, w in self.densities:
            if w:
                out = out + w * density(d, params, x)
        return out

    def is_trivial(self):
        return all(w == 0 for *_, w in self.densities) and self.atom_mass == 0.0

    def check_inside(self, domain):
        for x, _ in self.atoms:
            if not (domain.a < x < domain.b):
                raise ParameterError(f"atom at {x} not inside ({domain.a}, {domain.b})")


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Node masses on the interior grid.

    ``atom_tags`` lists node indices carrying snapped atoms and
    ``lost_mass`` the mass that fell outside the interval when the
    measure was produced by mollification.
    """

    masses: np.ndarray
    atom_tags: tuple = ()
    lost_mass: float = 0.0

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        if m.ndim != 1:
            raise ParameterError("masses must be a vector")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def tv(self):
        return tv_norm(self)

    @property
    def is_nonnegative(self):
        return bool(np.all(self.masses >= 0))

    def __add__(self, other):
        return GridMeasure(self.masses + other.masses, tuple(sorted(set(self.atom_tags) | set(other.atom_tags))),
                           self.lost_mass + other.lost_mass)

    def __sub__(self, other):
        return GridMeasure(self.masses - other.masses, self.atom_tags, self.lost_mass - other.lost_mass)

    def __mul__(self, t):
        return GridMeasure(float(t) * self.masses, self.atom_tags, float(t) * self.lost_mass)

    __rmul__ = __mul__

    def density(self, h):
        """Node densities ``masses / h``."""
        return self.masses / h


def tv_norm(mu):
    """Total variation ``sum |masses|``."""
    return float(np.sum(np.abs(getattr(mu, "masses", mu))))


def discretize(spec, domain):
    """Midpoint rule for densities; each atom goes whole to its nearest node."""
    spec.check_inside(domain)
    x = domain.nodes
    masses = spec.density_values(x) * domain.h
    if np.any(masses < 0):
        raise ParameterError("densities must be nonnegative")
    tags = []
    for xa, m in spec.atoms:
        i = domain.nearest_node(xa)
        masses[i] += m
        if m > 0:
            tags.append(i)
    return GridMeasure(masses, tuple(sorted(set(tags))))


@lru_cache(maxsize=1)
def _mollifier_integral():
    val, _ = integrate.quad(lambda t: np.exp(1.0 / (t * t - 1.0)), -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    return val


@dataclass(frozen=True)
class Mollifier:
    """``j_eps(x) = eps^{-1} j(x / eps)`` with ``j = c exp(1/(x^2 - 1))`` on ``|x| < 1``."""

    epsilon: float
    c: float = field(init=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "c", 1.0 / _mollifier_integral())

    def __call__(self, x):
        t = np.asarray(x, dtype=float) / self.epsilon
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        out[inside] = self.c * np.exp(1.0 / (t[inside] ** 2 - 1.0)) / self.epsilon
        return out

    def integral(self):
        """Numerical integral of ``j_eps`` (should be 1)."""
        val, _ = integrate.quad(self, -self.epsilon, self.epsilon, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val


# composite Gauss-Legendre rule on [-1, 1] for the density convolution
_GL_PANELS = 64
_GL_ORDER = 8


def _panel_rule():
    t, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(-1.0, 1.0, _GL_PANELS + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def mollify(spec, epsilon, domain):
    """Node masses of ``j_eps * mu`` restricted to the interval interior.

    Atoms are spread with lattice-normalised kernel weights, so an atom
    farther than ``epsilon`` from the boundary keeps its mass exactly.
    Densities are convolved by Gauss-Legendre quadrature over
    ``(a, b)`` (the measure lives on the interval). ``lost_mass`` records
    what leaves the interval.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    h = domain.h
    if epsilon < 4 * h - 1e-14:
        raise ResolutionError(f"epsilon={epsilon} under-resolved: need epsilon >= 4h = {4 * h}")
    spec.check_inside(domain)
    j = Mollifier(epsilon)
    x = domain.nodes
    masses = np.zeros(domain.n_interior)
    lost = 0.0

    for xa, m in spec.atoms:
        if m == 0:
            continue
        # all lattice points a + k h within reach of the kernel, interior or not
        k0 = int(np.floor((xa - epsilon - domain.a) / h))
        k1 = int(np.ceil((xa + epsilon - domain.a) / h))
        k = np.arange(k0, k1 + 1)
        vals = j(domain.a + k * h - xa)
        total = vals.sum()
        inside = (k >= 1) & (k <= domain.n_interior)
        masses[k[inside] - 1] += m * vals[inside] / total
        lost += m * vals[~inside].sum() / total

    if spec.densities:
        t, w = _panel_rule()
        y = x[:, None] + epsilon * t[None, :]
        f = spec.density_values(y)
        f[(y <= domain.a) | (y >= domain.b)] = 0.0
        conv = (f * j(epsilon * t)[None, :] * w[None, :]).sum(axis=1) * epsilon
        masses += conv * h
        # mass of the density carried by interior cells minus what the convolution keeps
        lost += max(float(spec.density_values(x).sum() * h - conv.sum() * h), 0.0)

    return GridMeasure(masses, (), lost)


def atoms_are_concentrated(alpha, dim=1):
    """Points are polar for the alpha-stable form iff ``alpha <= dim``."""
    return float(alpha) <= dim


def decompose(spec, alpha):
    """Split into ``(diffuse, concentrated)`` parts.

    Densities are always diffuse. In one dimension an atom charges a set
    of positive capacity only when ``alpha > 1``.
    """
    if atoms_are_concentrated(alpha):
        return spec.density_part, spec.atom_part
    return spec, MeasureSpec()
