"""Independent cross-checks, built only on numpy, scipy and specfun.

* shooting in xi for the H~ eigenvalue equation,
* a truncated tridiagonal eigensolve for lambda^0_nu(theta),
* a Miller backward-recurrence coefficient table,
* the monodromy of the spheroidal equation around both singular points,
* a flat-space radial oscillator solved by finite differences.

Parameter objects only need ``a`` and ``omega`` attributes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, optimize

from .errors import ConvergenceError, DomainError

FROBENIUS_TERMS = 12


# ---------------------------------------------------------------------------
# Shooting in xi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShootingConfig:
    xi_max: float = 30.0
    step_tol: float = 1e-11
    series_radius: float = 0.1

    def __post_init__(self):
        if not (self.xi_max > 1.0 + self.series_radius and self.series_radius > 0):
            raise DomainError("need xi_max > 1 + series_radius > 1")
        if not self.step_tol > 0:
            raise DomainError("step_tol must be positive")


def _coupling(params):
    return params.a**4 * params.omega**2 / 4.0


def frobenius_regular(m, z_tilde, params, n_terms=FROBENIUS_TERMS):
    """Coefficients c_k of y_I = t^{m/2} sum_k c_k t^k, t = xi - 1, c_0 = 1."""
    c = _coupling(params)
    e = 0.25 + z_tilde
    sig = 0.5 * m
    co = [1.0 + 0j]
    for n in range(1, n_terms):
        p = n - 1 + sig
        q = n - 2 + sig
        acc = (4 * p * p + 2 * p + 2 * e) * co[n - 1]
        if n >= 2:
            acc += (q * q + q + e - 4 * c) * co[n - 2]
        if n >= 3:
            acc -= 4 * c * co[n - 3]
        if n >= 4:
            acc -= c * co[n - 4]
        co.append(-acc / (4 * (n + sig) ** 2 - m * m))
    return np.array(co)


def frobenius_log_m0(z_tilde, params, A=-0.5, n_terms=FROBENIUS_TERMS):
    """m = 0 second solution y_II = A y_I log t + sum_k d_k t^k with d_0 = 0."""
    c = _coupling(params)
    e = 0.25 + z_tilde
    ci = frobenius_regular(0, z_tilde, params, n_terms)
    d = [0j]
    for n in range(1, n_terms):
        g = 8 * n * ci[n] + (8 * (n - 1) + 2) * ci[n - 1] + ((2 * (n - 2) + 1) * ci[n - 2] if n >= 2 else 0)
        acc = A * g + (4 * (n - 1) ** 2 + 2 * (n - 1) + 2 * e) * d[n - 1]
        if n >= 2:
            acc += ((n - 2) ** 2 + (n - 2) + e - 4 * c) * d[n - 2]
        if n >= 3:
            acc -= 4 * c * d[n - 3]
        if n >= 4:
            acc -= c * d[n - 4]
        d.append(-acc / (4 * n * n))
    return ci, np.array(d)


def _patch_radius(co, m, start):
    t = start
    k = np.arange(len(co))
    for _ in range(60):
        terms = np.abs(co) * t**k
        if terms[-1] < 1e-14 * abs(np.sum(co * t**k)):
            return t
        t *= 0.5
    raise ConvergenceError("Frobenius series does not settle")


def _series_eval(co, m, t, log_part=None):
    k = np.arange(len(co))
    sig = 0.5 * m
    val = np.sum(co * t ** (k + sig))
    der = np.sum(co * (k + sig) * t ** (k + sig - 1))
    return val, der


def _xi_rhs(m, z_tilde, params):
    c = _coupling(params)

    def f(xi, y):
        s = xi * xi - 1.0
        q = m * m / s + c * s - 0.25 - z_tilde
        return [y[1], (q * y[0] - 2.0 * xi * y[1]) / s]

    return f


def _integrate(f, x0, x1, y0, tol):
    sol = integrate.solve_ivp(f, (x0, x1), y0, method="DOP853", rtol=tol, atol=1e-30)
    if sol.status != 0:
        raise ConvergenceError(f"shooting integration failed: {sol.message}; raise the step budget")
    return sol.y[:, -1]


def regular_solution(m, z_tilde, params, xi, cfg=ShootingConfig()):
    """(y_I, y_I') at xi, from the Frobenius patch continued by integration."""
    co = frobenius_regular(m, z_tilde, params).real
    t0 = _patch_radius(co, m, cfg.series_radius)
    if xi - 1.0 <= t0:
        return _series_eval(co, m, xi - 1.0)
    y0 = list(_series_eval(co, m, t0))
    return tuple(_integrate(_xi_rhs(m, z_tilde, params), 1.0 + t0, xi, y0, cfg.step_tol))


def log_solution_m0(z_tilde, params, xi, cfg=ShootingConfig()):
    """(y_II, y_II') at xi for m = 0, normalized by the log coefficient -1/2."""
    ci, d = frobenius_log_m0(z_tilde, params)
    ci, d = ci.real, d.real
    t0 = _patch_radius(ci, 0, cfg.series_radius)

    def ev(t):
        yi, dyi = _series_eval(ci, 0, t)
        v, dv = _series_eval(d, 0, t)
        return -0.5 * yi * math.log(t) + v, -0.5 * (dyi * math.log(t) + yi / t) + dv

    if xi - 1.0 <= t0:
        return ev(xi - 1.0)
    return tuple(_integrate(_xi_rhs(0, z_tilde, params), 1.0 + t0, xi, list(ev(t0)), cfg.step_tol))


def decaying_seed(m, z_tilde, params, xi):
    """Two-term asymptotic seed exp(-k xi) xi^-1 (1 - e/(2 k xi)), scaled by exp(k xi)."""
    kappa = math.sqrt(_coupling(params))
    e = 0.25 + z_tilde
    b = -e / (2.0 * kappa)
    val = (1.0 + b / xi) / xi
    dlog = -kappa - 1.0 / xi - (b / xi**2) / (1.0 + b / xi)
    return val, val * dlog


def decaying_solution(m, z_tilde, params, xi, cfg=ShootingConfig()):
    y0 = list(decaying_seed(m, z_tilde, params, cfg.xi_max))
    return tuple(_integrate(_xi_rhs(m, z_tilde, params), cfg.xi_max, xi, y0, cfg.step_tol))


def _match_point(m, z_tilde, params, cfg):
    c = _coupling(params)
    xi = math.sqrt(1.0 + max(0.25 + z_tilde + m * m, 1.0) / c)
    return min(max(xi, 1.0 + 2.0 * cfg.series_radius), 0.5 * cfg.xi_max)


def shooting_mismatch(m, z_tilde, params, cfg=ShootingConfig()):
    """Normalized Wronskian of y_I and the decaying solution; zero at eigenvalues."""
    xm = _match_point(m, z_tilde, params, cfg)
    y1 = regular_solution(m, z_tilde, params, xm, cfg)
    y2 = decaying_solution(m, z_tilde, params, xm, cfg)
    w = y1[0] * y2[1] - y1[1] * y2[0]
    return w / math.sqrt((y1[0] ** 2 + y1[1] ** 2) * (y2[0] ** 2 + y2[1] ** 2))


def shoot_eigen(m, params, window, cfg=ShootingConfig(), step=None):
    """H-scale eigenvalues of channel m in ``window`` by shooting in xi."""
    lo, hi = (float(w) for w in window)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise DomainError("window must be bounded")
    a2 = params.a**2
    if step is None:
        step = min(0.1, params.omega / 4.0)
    grid = np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / step)) + 1))

    def f(z):
        return shooting_mismatch(m, a2 * z, params, cfg)

    vals = [f(z) for z in grid]
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-14))
    return roots


# ---------------------------------------------------------------------------
# Tridiagonal eigensolve for lambda
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TridiagProblem:
    nu: float
    theta: float
    R: int = 40
    mu: int = 0

    def __post_init__(self):
        if self.mu != 0:
            raise DomainError("the tridiagonal oracle covers mu = 0")
        if self.R < 8:
            raise DomainError("half-bandwidth R must be >= 8")
        for r in range(-self.R - 1, self.R + 2):
            if abs(self.nu + 2 * r + 0.5) < 1e-12:
                raise DomainError("scaling singular: nu + 2r + 1/2 = 0 for some r")


def _recurrence(nu, theta, r):
    n = nu + 2.0 * r
    g = n * (n - 1.0) / ((n - 1.5) * (n - 0.5)) * theta
    b = -n * (n + 1.0) + (n * (n + 1.0) - 1.0) / ((n - 0.5) * (n + 1.5)) * 2.0 * theta
    al = (n + 2.0) * (n + 1.0) / ((n + 1.5) * (n + 2.5)) * theta
    return g, b, al


def tridiag_matrix(problem):
    """Recurrence matrix after the diagonal scaling that balances each link.

    Links with alpha_r gamma_{r+1} > 0 become symmetric; a link with a
    negative product keeps entries of opposite sign.
    """
    R = problem.R
    rs = np.arange(-R, R + 1)
    g, b, al = _recurrence(problem.nu, problem.theta, rs.astype(float))
    n = len(rs)
    M = np.zeros((n, n))
    np.fill_diagonal(M, b)
    for i in range(n - 1):
        up, down = al[i], g[i + 1]
        mag = math.sqrt(abs(up * down))
        M[i, i + 1] = math.copysign(mag, up)
        M[i + 1, i] = math.copysign(mag, down)
    return M


def asymmetric_links(problem):
    """Indices r of links whose product alpha_r gamma_{r+1} is negative."""
    R = problem.R
    rs = np.arange(-R, R)
    _, _, al = _recurrence(problem.nu, problem.theta, rs.astype(float))
    g1, _, _ = _recurrence(problem.nu, problem.theta, rs + 1.0)
    return [int(r) for r, p in zip(rs, al * g1) if p < 0]


def tridiag_lambda(problem):
    """All eigenvalues of the truncated recurrence matrix, i.e. the -lambda candidates.

    Real when every link is symmetric; otherwise some may form complex pairs.
    """
    M = tridiag_matrix(problem)
    if not asymmetric_links(problem):
        d = np.diag(M).copy()
        e = np.diag(M, 1).copy()
        return list(linalg.eigh_tridiagonal(d, e, eigvals_only=True))
    vals = np.linalg.eigvals(M)
    return sorted((complex(v) if abs(v.imag) > 1e-12 * (1 + abs(v)) else float(v.real) for v in vals), key=lambda v: complex(v).real)


def _complex_matrix(nu, theta, R):
    rs = np.arange(-R, R + 1).astype(float)
    g, b, al = _recurrence(nu, theta, rs)
    return np.diag(b) + np.diag(al[:-1], 1) + np.diag(g[1:], -1)


def tridiag_branch(nu, theta, R=40, steps=512, bulge=0.05):
    """lambda^0_nu(theta) from the truncated matrix, tracked from theta = 0.

    The branch is followed along theta(t) = t theta + i bulge |theta| sin(pi t),
    so that collisions of real eigenvalues on the real axis are passed on a
    definite side; for a complex result the member with Im >= 0 is returned.
    """
    TridiagProblem(nu, theta, R)
    lam = complex(nu * (nu + 1.0))
    for k in range(1, steps + 1):
        t = k / steps
        th = theta * t + 1j * bulge * abs(theta) * math.sin(math.pi * t)
        vals = -np.linalg.eigvals(_complex_matrix(nu, th, R))
        lam = complex(vals[np.argmin(np.abs(vals - lam))])
    if abs(lam.imag) <= 1e-12 * (1 + abs(lam)):
        return lam.real
    return complex(lam.real, abs(lam.imag))


# ---------------------------------------------------------------------------
# Backward recurrence and monodromy
# ---------------------------------------------------------------------------


def miller_coefficients(nu, theta, lam, R=40, extra=40, mu=0):
    """a_r for |r| <= R by backward recurrence from |r| = R + extra, a_0 = 1."""
    nu, lam = complex(nu), complex(lam)

    def terms(r):
        n = nu + 2.0 * r
        g = (n - mu) * (n - mu - 1.0) / ((n - 1.5) * (n - 0.5)) * theta
        b = -n * (n + 1.0) + (n * (n + 1.0) + mu * mu - 1.0) / ((n - 0.5) * (n + 1.5)) * 2.0 * theta
        al = (n + mu + 2.0) * (n + mu + 1.0) / ((n + 1.5) * (n + 2.5)) * theta
        return g, b + lam, al

    top = R + extra
    up = np.zeros(top + 1, dtype=complex)
    ratio = 0j
    for r in range(top, 0, -1):
        g, b, al = terms(r)
        ratio = -g / (b + al * ratio)
        up[r] = ratio
    down = np.zeros(top + 1, dtype=complex)
    ratio = 0j
    for r in range(top, 0, -1):
        g, b, al = terms(-r)
        ratio = -al / (b + g * ratio)
        down[r] = ratio
    a = np.zeros(2 * R + 1, dtype=complex)
    a[R] = 1.0
    for r in range(1, R + 1):
        a[R + r] = a[R + r - 1] * up[r]
        a[R - r] = a[R - r + 1] * down[r]
    return a


def monodromy_trace(mu, theta, lam, radius=2.0):
    """Half-trace of the monodromy of the spheroidal equation along |xi| = radius.

    Equals cos(2 pi nu) for the characteristic exponent nu of lambda.
    """
    lam = complex(lam)
    theta = complex(theta)

    def f(phi, y):
        xi = radius * cmath.exp(1j * phi)
        dxi = 1j * xi
        s = 1.0 - xi * xi
        p, dp = y[0], y[1]
        d2 = (2.0 * xi * dp - (lam + 4.0 * theta * s - mu * mu / s) * p) / s
        return [dp * dxi, d2 * dxi]

    cols = []
    for y0 in ([1.0 + 0j, 0j], [0j, 1.0 + 0j]):
        sol = integrate.solve_ivp(f, (0.0, 2.0 * math.pi), y0, method="DOP853", rtol=1e-12, atol=1e-14)
        if sol.status != 0:
            raise ConvergenceError("monodromy integration failed")
        cols.append(sol.y[:, -1])
    return 0.5 * (cols[0][0] + cols[1][1])


# ---------------------------------------------------------------------------
# Flat-space radial oscillator
# ---------------------------------------------------------------------------


def _flat_levels(m, omega, n_levels, R, N):
    h = R / N
    rho = (np.arange(N) + 0.5) * h
    faces = np.arange(N + 1) * h
    diag = (faces[:-1] + faces[1:]) / h**2 / rho + m * m / rho**2 + 0.25 * omega**2 * rho**2
    off = -faces[1:-1] / h**2 / np.sqrt(rho[:-1] * rho[1:])
    return linalg.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, n_levels - 1))


def flat_oscillator_levels(m, omega, n_levels=3, N=4000):
    """Lowest levels of -psi'' - psi'/rho + m^2 psi/rho^2 + (omega^2 rho^2/4) psi = E psi.

    Cell-centred finite differences with Richardson extrapolation in h.
    """
    R = 2.0 * math.sqrt(2.0 * (2 * n_levels + abs(m) + 20) / omega)
    e1 = _flat_levels(abs(m), omega, n_levels, R, N)
    e2 = _flat_levels(abs(m), omega, n_levels, R, 2 * N)
    return list((4.0 * e2 - e1) / 3.0)
