"""Singular nonlinearities ``g`` with power-type growth bounds.

Every nonlinearity satisfies ``c1 <= g(u) * u**gamma <= c2`` for ``u > 0``.
Built-in kinds:

``pure_power``
    ``g(u) = c * u**-gamma`` (requires ``c1 == c2 == c``).
``shifted_power``
    ``g(u) = u**-gamma * (c1 + (c2 - c1) / (1 + u))``, nonincreasing.
``oscillating``
    ``g(u) = u**-gamma * (m + r * sin(omega * log u))`` with
    ``m = (c1 + c2) / 2`` and ``r = (c2 - c1) / 2``. Not monotone once
    ``r * omega > gamma * m``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = ["Nonlinearity", "SumNonlinearity", "KINDS", "growth_mesh"]

KINDS = ("pure_power", "shifted_power", "oscillating")


def growth_mesh(num=1000):
    return np.logspace(-8, 8, num)


@dataclass(frozen=True)
class Nonlinearity:
    kind: str
    gamma: float
    c1: float = 1.0
    c2: float = 1.0
    omega: float = 4.0
    monotone: bool = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown nonlinearity kind {self.kind!r}; known: {KINDS}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not (0 < self.c1 <= self.c2 < np.inf):
            raise ParameterError(f"need 0 < c1 <= c2, got c1={self.c1}, c2={self.c2}")
        if self.kind == "pure_power" and self.c1 != self.c2:
            raise ParameterError("pure_power needs c1 == c2")
        declared = self.monotone
        sampled = self._sampled_monotone()
        if declared is None:
            object.__setattr__(self, "monotone", sampled)
        elif declared and not sampled:
            raise ParameterError(f"{self.kind} with these parameters is not nonincreasing")

    @classmethod
    def power(cls, gamma, c=1.0):
        """``g(u) = c * u**-gamma``."""
        return cls("pure_power", gamma, c, c)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        base = u ** -self.gamma
        if self.kind == "pure_power":
            return self.c1 * base
        if self.kind == "shifted_power":
            return base * (self.c1 + (self.c2 - self.c1) / (1.0 + u))
        m, r = 0.5 * (self.c1 + self.c2), 0.5 * (self.c2 - self.c1)
        return base * (m + r * np.sin(self.omega * np.log(u)))

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        g = self(u)
        if self.kind == "pure_power":
            return -self.gamma * g / u
        if self.kind == "shifted_power":
            dc = self.c2 - self.c1
            return -self.gamma * g / u - u ** -self.gamma * dc / (1.0 + u) ** 2
        r = 0.5 * (self.c2 - self.c1)
        return -self.gamma * g / u + u ** (-self.gamma - 1.0) * r * self.omega * np.cos(self.omega * np.log(u))

    def scaled(self, t):
        """``t * g`` (keeps the kind, scales both growth constants)."""
        return Nonlinearity(self.kind, self.gamma, t * self.c1, t * self.c2, self.omega)

    def lower(self):
        """The pure power ``c1 * u**-gamma`` bounding ``g`` from below."""
        return Nonlinearity.power(self.gamma, self.c1)

    def upper(self):
        return Nonlinearity.power(self.gamma, self.c2)

    def growth_ratio(self, u=None):
        """Sampled ``g(u) * u**gamma``."""
        u = growth_mesh() if u is None else np.asarray(u, dtype=float)
        return self(u) * u ** self.gamma

    def check_growth(self, rtol=1e-12):
        r = self.growth_ratio()
        return bool(np.all(r >= self.c1 * (1 - rtol)) and np.all(r <= self.c2 * (1 + rtol)))

    def _sampled_monotone(self):
        g = self(growth_mesh())
        return bool(np.all(np.diff(g) <= 0.0))


class SumNonlinearity:
    """``g + h`` for two nonlinearities (possibly different exponents)."""

    def __init__(self, g, h):
        self.g, self.h = g, h
        self.monotone = bool(g.monotone and h.monotone)

    def __call__(self, u):
        return self.g(u) + self.h(u)

    def derivative(self, u):
        return self.g.derivative(u) + self.h.derivative(u)

    def __repr__(self):
        return f"SumNonlinearity({self.g!r}, {self.h!r})"
