"""Radial ODE route on the physical scale, for parameters beyond the series range.

With x = rho/a the channel-m equation for H is

    psi'' + coth(x)/a psi' - [m^2/(a^2 sinh^2 x) + U - E - 1/(4a^2)] psi = 0,
    U = (a^2 omega^2 / 4) sinh^2 x.

It is integrated in s = log(rho) for (psi, w = rho psi'), which keeps the
center regular: w -> m psi for the regular solution and psi -> A log(rho) + B
for the m = 0 solution decaying at infinity.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, PoleError

RTOL = 1e-11
DECAY_NEPERS = 40.0
SCAN_STEP_FRACTION = 0.125


def _xcothx(x):
    return 1.0 + x * x / 3.0 if abs(x) < 1e-4 else x / math.tanh(x)


def _x_over_sinh(x):
    return 1.0 - x * x / 6.0 if abs(x) < 1e-4 else x / math.sinh(x)


def _rhs(m, E, params):
    a = params.a
    c = 0.25 * a * a * params.omega**2
    shift = E + 0.25 / (a * a)

    def f(s, y):
        rho = math.exp(s)
        x = rho / a
        q = m * m * _x_over_sinh(x) ** 2 + rho * rho * (c * math.sinh(x) ** 2 - shift)
        return [y[1], y[1] * (1.0 - _xcothx(x)) + q * y[0]]

    return f


def _potential(rho, m, params):
    a = params.a
    x = rho / a
    return (m * m - 0.25) / (a * a * math.sinh(x) ** 2) + 0.25 * a * a * params.omega**2 * math.sinh(x) ** 2


def turning_point(E, m, params):
    """Outer classical turning point of the Liouville potential (rho scale)."""
    a, w = params.a, params.omega
    target = max(float(np.real(E)), w * max(1.0, abs(m))) + 0.25 / (a * a)
    return a * math.asinh(2.0 * math.sqrt(target) / (a * w))


def outer_radius(E, m, params):
    """Radius beyond which the decaying solution has fallen by DECAY_NEPERS."""
    rt = turning_point(E, m, params)
    e = float(np.real(E))
    h = 0.02 * rt
    rho, acc = rt, 0.0
    while acc < DECAY_NEPERS:
        rho += h
        acc += h * math.sqrt(max(_potential(rho, m, params) - e, 0.0))
        if rho > 1e3 * rt:
            raise ConvergenceError("could not place the outer integration boundary")
    return rho


def _solve(f, s0, s1, y0):
    sol = integrate.solve_ivp(f, (s0, s1), y0, method="DOP853", rtol=RTOL, atol=1e-30)
    if sol.status != 0:
        raise ConvergenceError(f"radial integration failed: {sol.message}")
    return sol.y[:, -1]


def _decaying(m, E, params, s_to):
    rho_max = outer_radius(E, m, params)
    kappa = np.sqrt(complex(_potential(rho_max, m, params) - E))
    y0 = [1.0, -rho_max * kappa]
    if not isinstance(E, complex):
        y0 = [1.0, -rho_max * kappa.real]
    return _solve(_rhs(m, E, params), math.log(rho_max), s_to, y0)


def mismatch(m, E, params):
    """Normalized Wronskian of the regular and decaying solutions at the turning point.

    Continuous in E and zero exactly at the channel eigenvalues.
    """
    E = float(E)
    rho_m = turning_point(E, m, params)
    if m == 0:
        rho0 = 1e-6 * rho_m
    else:
        rho0 = rho_m * 10.0 ** (-max(3.0, 8.0 / m))
    s_m = math.log(rho_m)
    y_out = _solve(_rhs(m, E, params), math.log(rho0), s_m, [1.0, float(m)])
    y_in = _decaying(m, E, params, s_m)
    w = y_out[0] * y_in[1] - y_out[1] * y_in[0]
    return w / math.sqrt((y_out[0] ** 2 + y_out[1] ** 2) * (y_in[0] ** 2 + y_in[1] ** 2))


def channel_eigenvalues(m, params, lo, hi, step=None):
    """Eigenvalues of channel m of H(inf) in [lo, hi] (physical scale)."""
    if step is None:
        step = min(0.1, 2.0 * params.omega * SCAN_STEP_FRACTION)
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    vals = [mismatch(m, e, params) for e in grid]
    roots = []
    for i in range(n - 1):
        if vals[i] == 0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(optimize.brentq(lambda e: mismatch(m, e, params), grid[i], grid[i + 1], xtol=1e-12, rtol=1e-14))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))
    return roots


def q_function_H(z, params):
    """Q^H(z) from the m = 0 decaying solution: psi ~ A log(rho) + B gives Q^H = -B/(2 pi A)."""
    z = complex(z)
    E = z.real if z.imag == 0 else z
    rho_t = turning_point(z.real, 0, params)
    rho0 = 1e-7 * rho_t
    s0 = math.log(rho0)
    y = _decaying(0, E, params, s0)
    A = y[1]
    if A == 0:
        raise PoleError(f"Q^H has a pole at z = {z}", location=z, channel=0)
    B = y[0] - A * s0
    return complex(-B / (2.0 * math.pi * A))

