"""Reference values computed without the package under test."""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn


def half_width(peak, floor=1e-12):
    """Distance from the maximum of ``-u'' = 1/u`` (value ``peak``) to its zero.

    Integrates from the symmetric peak until ``u`` falls to ``floor * peak``;
    the remaining stretch is below ``floor * peak`` in length.
    """
    def rhs(_, y):
        return [y[1], -1.0 / y[0]]

    def hit(_, y):
        return y[0] - floor * peak

    hit.terminal = True
    sol = solve_ivp(rhs, (0.0, 10.0), [peak, 0.0], events=hit, rtol=1e-12, atol=1e-14, method="DOP853")
    return float(sol.t_events[0][0])


def shooting_peak(length=1.0):
    """Peak of the positive solution of ``-u'' = 1/u`` on ``(0, length)`` with zero ends."""
    return brentq(lambda p: half_width(p) - length / 2, 0.05, 2.0, xtol=1e-14)


def getoor_constant(alpha):
    """``(-Delta)^{alpha/2} (1 - x^2)_+^{alpha/2}`` on ``(-1, 1)``, from the Gamma-function formula."""
    return 2**alpha * gamma_fn(1 + alpha / 2) * gamma_fn((1 + alpha) / 2) / math.sqrt(math.pi)


def exit_time(alpha, x, r=1.0):
    """Mean exit time from ``(-r, r)`` for the process with generator ``-(-Delta)^{alpha/2}``."""
    return (r * r - x * x) ** (alpha / 2) / getoor_constant(alpha)


def green_lebesgue(x):
    """Solution of ``-u'' = 1`` on ``(0, 1)`` with zero ends."""
    x = np.asarray(x, dtype=float)
    return x * (1 - x) / 2


def point_capacity_local(x0, a=0.0, b=1.0):
    """Dirichlet energy of the tent equal to 1 at ``x0`` and 0 at the ends."""
    return 1.0 / (x0 - a) + 1.0 / (b - x0)


# Values frozen from the functions above (tests check the functions still reproduce them).
SHOOTING_PEAK = 0.3989422804014327
GETOOR = {0.5: 0.886226925452758, 1.0: 1.0, 1.5: 1.3293403881791368, 2.0: 2.0}
