"""Numba kernels for killed Brownian / symmetric stable walks.

Every path owns a counter-based splitmix64 stream keyed by
``(seed, path_index)``, so results do not depend on how paths are split
into batches. Gaussian variates use the Marsaglia-Tsang ziggurat; stable
variates the Chambers-Mallows-Stuck transform.
"""

import math

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0


def _zig_tables():
    m1 = 2147483648.0
    dn = tn = 3.442619855899
    vn = 9.91256303526217e-3
    kn = np.zeros(128, dtype=np.int64)
    wn = np.zeros(128)
    fn = np.zeros(128)
    q = vn / math.exp(-0.5 * dn * dn)
    kn[0] = np.int64((dn / q) * m1)
    kn[1] = 0
    wn[0] = q / m1
    wn[127] = dn / m1
    fn[0] = 1.0
    fn[127] = math.exp(-0.5 * dn * dn)
    for i in range(126, 0, -1):
        dn = math.sqrt(-2.0 * math.log(vn / dn + math.exp(-0.5 * dn * dn)))
        kn[i + 1] = np.int64((dn / tn) * m1)
        tn = dn
        fn[i] = math.exp(-0.5 * dn * dn)
        wn[i] = dn / m1
    return kn, wn, fn


ZIG_KN, ZIG_WN, ZIG_FN = _zig_tables()


@nb.njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def path_key(seed, index):
    return _mix(np.uint64(seed) ^ _mix(np.uint64(index) * _GOLDEN + _GOLDEN))


# The helpers below thread the generator state through return values and
# are force-inlined: out-of-line calls dominate the step cost otherwise.

@nb.njit(inline="always")
def _uniform(s):
    """Next value in the open interval (0, 1) and the advanced state."""
    s = s + _GOLDEN
    return (np.float64(_mix(s) >> np.uint64(11)) + 0.5) * _TWO53, s


@nb.njit(inline="always")
def _normal_tail(s, hz, iz, kn, wn, fn):
    r = 3.442620
    while True:
        x = hz * wn[iz]
        if iz == 0:
            while True:
                u1, s = _uniform(s)
                u2, s = _uniform(s)
                x = -math.log(u1) * 0.2904764
                y = -math.log(u2)
                if y + y >= x * x:
                    break
            return (r + x if hz > 0 else -r - x), s
        u1, s = _uniform(s)
        if fn[iz] + u1 * (fn[iz - 1] - fn[iz]) < math.exp(-0.5 * x * x):
            return x, s
        s = s + _GOLDEN
        bits = _mix(s)
        hz = np.int64(bits >> np.uint64(32)) - 2147483648
        iz = np.int64(bits & np.uint64(127))
        if abs(hz) < kn[iz]:
            return hz * wn[iz], s


@nb.njit(inline="always")
def _normal(s, kn, wn, fn):
    s = s + _GOLDEN
    bits = _mix(s)
    hz = np.int64(bits >> np.uint64(32)) - 2147483648
    iz = np.int64(bits & np.uint64(127))
    if abs(hz) < kn[iz]:
        return hz * wn[iz], s
    return _normal_tail(s, hz, iz, kn, wn, fn)


@nb.njit(inline="always")
def _stable(s, alpha):
    """Standard symmetric alpha-stable variate (characteristic function exp(-|t|^alpha))."""
    u1, s = _uniform(s)
    v = math.pi * (u1 - 0.5)
    if alpha == 1.0:
        return math.tan(v), s
    u2, s = _uniform(s)
    w = -math.log(u2)
    x = (math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha)) * (
        math.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    return x, s


@nb.njit(error_model="numpy", boundscheck=False, cache=True, nogil=True)
def run_paths(seed, first, count, x0, a, b, alpha, dt, max_steps, table, out, timed_out, kn, wn, fn):
    """Simulate ``count`` paths with global indices ``first, first+1, ...``.

    ``table`` holds the integrand on ``table.size`` equal cells of
    ``(a, b)``. ``out[i]`` receives ``dt * sum table[cell(X_k)]`` over the
    steps completed before the killing step. For ``alpha == 2`` a
    Brownian-bridge test also kills paths that crossed the boundary
    between two monitored positions.
    """
    m = table.size
    inv_cell = m / (b - a)
    sigma = math.sqrt(2.0 * dt)
    scale = dt ** (1.0 / alpha)
    bridge_cut = 40.0 * dt
    inv_dt = 1.0 / dt
    gaussian = alpha == 2.0
    for i in range(count):
        s = path_key(seed, first + i)
        y = x0
        acc = 0.0
        alive = True
        for _ in range(max_steps):
            if gaussian:
                z, s = _normal(s, kn, wn, fn)
                y1 = y + sigma * z
            else:
                z, s = _stable(s, alpha)
                y1 = y + scale * z
            if y1 <= a or y1 >= b:
                alive = False
                break
            if gaussian:
                pa = (y - a) * (y1 - a)
                pb = (b - y) * (b - y1)
                if pa < bridge_cut or pb < bridge_cut:
                    p = math.exp(-pa * inv_dt) + math.exp(-pb * inv_dt)
                    u, s = _uniform(s)
                    if u < p:
                        alive = False
                        break
            y = y1
            k = int((y - a) * inv_cell)
            if k >= m:
                k = m - 1
            acc += table[k]
        out[i] = acc * dt
        timed_out[i] = alive
