"""Green function of the unperturbed dot (Friedrichs extension).

Kernels are for the operator

    H~_m = -d/dxi (xi^2 - 1) d/dxi + m^2/(xi^2 - 1) + (a^4 omega^2/4)(xi^2 - 1) - 1/4

on (1, inf) with xi = cosh(rho/a). The physical Hamiltonian is H = H~ / a^2, so
the H-scale kernel at energy z is a^2 times the H~ kernel at a^2 z.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import spheroidal as sph
from .errors import AccuracyError, DomainError, PoleError, RangeError

# The series machinery is used for |theta| up to this value; beyond it the
# coefficient sums lose too many digits to cancellation.
THETA_SERIES_MAX = 16.0
WRONSKIAN_REFS = (1.5, 3.0, 10.0)
WRONSKIAN_AGREEMENT = 1e-8
EIGEN_HIT_TOL = 1e-12
MAX_WINDOW = 480
# Degenerate exponents (nu integer or nu + 1/2 integer) are handled by
# averaging the analytic z-dependence over a small circle.
DEGENERATE_NU_DIST = 1e-4
AVERAGE_RADIUS = 1e-2
AVERAGE_POINTS = 8
MAX_CHANNELS = 400
# High channels (where the series overflow or lose digits) are evaluated from
# log-derivatives when the potential keeps every solution free of nodes.
RICCATI_MIN_M = 20
RICCATI_RTOL = 1e-13
RICCATI_ATOL = 1e-15
RICCATI_DECAY = 20.0


@dataclass(frozen=True)
class ModelParams:
    """Curvature radius ``a`` and oscillator frequency ``omega``."""

    a: float
    omega: float
    theta: float = field(init=False)

    def __post_init__(self):
        a = float(self.a)
        omega = float(self.omega)
        if not (math.isfinite(a) and a > 0):
            raise DomainError(f"curvature radius must be positive, got {self.a!r}")
        if not (math.isfinite(omega) and omega > 0):
            raise DomainError(f"frequency must be positive, got {self.omega!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "theta", -(a**4) * omega**2 / 16.0)

    @property
    def series_ok(self):
        return abs(self.theta) <= THETA_SERIES_MAX


@dataclass(frozen=True)
class GreenValue:
    m: int
    z: complex
    value: complex
    route: str = "series"


def _require_series(theta):
    if abs(theta) > THETA_SERIES_MAX:
        raise RangeError(
            f"|theta| = {abs(theta):.3g} exceeds the spheroidal-series range {THETA_SERIES_MAX:g}"
        )


def _degenerate(nu):
    nu = complex(nu)
    d_int = abs(nu - round(nu.real))
    d_half = abs(nu + 0.5 - round(nu.real + 0.5))
    return min(d_int, d_half) < DEGENERATE_NU_DIST


class DegenerateExponent(DomainError):
    """Channel exponent too close to an integer or half-integer for direct evaluation."""


@dataclass(frozen=True)
class Channel:
    """Spheroidal data of partial wave ``m`` at spectral parameter ``z``."""

    m: int
    z: complex
    theta: float
    nu: complex
    table: sph.CoefficientTable = field(repr=False)
    s: complex

    def widened(self):
        window = 2 * self.table.window
        if window > MAX_WINDOW:
            raise AccuracyError(f"coefficient window limit {MAX_WINDOW} reached in channel m={self.m}")
        table = sph.widened(self.table, window)
        return Channel(self.m, self.z, self.theta, self.nu, table, self.s)

    def ps(self, xi, deriv=False):
        if xi == 1.0:
            value = 1.0 / self.s if self.m == 0 else 0.0j
            return (value, None) if deriv else value
        return sph.angular_Ps(self.table, xi, deriv=deriv)

    def s3(self, xi, deriv=False):
        if deriv:
            return sph.radial_S_bessel(3, self.table, xi, deriv=True)
        return sph.radial_S(3, self.table, xi)


@functools.lru_cache(maxsize=4096)
def _channel_cached(m, z, theta):
    lam = -z - 0.25
    nu = sph.nu_from_lambda(m, theta, lam, labeled=False)
    if _degenerate(nu):
        raise DegenerateExponent(f"exponent nu = {nu:.6g} is degenerate at z = {z:.6g}")
    index = sph.SpheroidalIndex(m, nu, theta)
    table = sph.auto_coefficients(index, lam)
    return Channel(m, z, theta, nu, table, sph.s_factor(table))


def channel(m, z, theta):
    """Channel data for |m| at H~-scale parameter z (cached)."""
    _require_series(theta)
    return _channel_cached(abs(int(m)), complex(z), float(theta))


def _with_growth(fn, ch):
    """Evaluate fn(channel), enlarging the coefficient window on truncation errors."""
    while True:
        try:
            return fn(ch)
        except AccuracyError:
            ch = ch.widened()


def circle_average(fn, z, radius=None):
    """Mean of fn over a circle around z (exact for functions analytic inside it)."""
    z = complex(z)
    if radius is None:
        radius = AVERAGE_RADIUS
    pts = [z + radius * cmath.exp(2j * math.pi * (k + 0.5) / AVERAGE_POINTS) for k in range(AVERAGE_POINTS)]
    return sum(fn(p) for p in pts) / AVERAGE_POINTS


def regular_in_z(fn):
    """Wrap fn(z, ...) so degenerate exponents fall back to a circle average."""

    @functools.wraps(fn)
    def wrapper(z, *args, **kwargs):
        try:
            return fn(z, *args, **kwargs)
        except DegenerateExponent:
            return circle_average(lambda p: fn(p, *args, **kwargs), z)

    return wrapper


def _wronskian_at(ch, xi):
    p, dp = ch.ps(xi, deriv=True)
    s3, ds3 = ch.s3(xi, deriv=True)
    return (xi * xi - 1.0) * (p * ds3 - dp * s3), p, s3


@functools.lru_cache(maxsize=4096)
def _wronskian_values(m, z, params):
    ch = channel(m, z, params.theta)
    while True:
        try:
            vals = [_wronskian_at(ch, xi) for xi in WRONSKIAN_REFS]
        except (AccuracyError, RangeError):
            ch = ch.widened()
            continue
        c0 = vals[0][0]
        spread = max(abs(v[0] - c0) for v in vals) / max(abs(c0), 1e-300)
        if spread <= WRONSKIAN_AGREEMENT or abs(c0) < EIGEN_HIT_TOL:
            return ch, vals, spread
        if 2 * ch.table.window > MAX_WINDOW:
            raise AccuracyError(f"Wronskian constant disagrees across reference points ({spread:.1e})")
        ch = ch.widened()


def wronskian_const(m, z, params):
    """(xi^2-1) W(Ps, S^(3)) of channel m at H~-scale parameter z.

    The value depends on the normalization of the exponent representative;
    its zeros (the channel eigenvalues) do not. A modulus below
    EIGEN_HIT_TOL marks an eigenvalue hit.
    """
    _, vals, _ = _wronskian_values(m, z, params)
    return vals[0][0]


def wronskian_spread(m, z, params):
    """Relative disagreement of the constant across the reference points."""
    return _wronskian_values(m, z, params)[2]


def is_eigenvalue_hit(value):
    return abs(value) < EIGEN_HIT_TOL


def log_derivative_gap(m, z, params, xi=WRONSKIAN_REFS[0]):
    """(xi^2-1)[S3'/S3 - Ps'/Ps] at ``xi``: normalization-free, real for real z."""
    ch = channel(m, z, params.theta)
    c, p, s3 = _with_growth(lambda c_: _wronskian_at(c_, xi), ch)
    return c / (p * s3)


def _partial_green_raw(z, m, xi1, xi2, params):
    lo, hi = min(xi1, xi2), max(xi1, xi2)
    if hi <= 1.0:
        raise DomainError("at most one argument may sit at the center xi = 1")
    ch, vals, _ = _wronskian_values(m, z, params)
    c = vals[0][0]
    if is_eigenvalue_hit(c):
        raise PoleError(f"z = {z} is an eigenvalue of channel m={m}", location=z, channel=m)
    p_lo = _with_growth(lambda c_: c_.ps(lo), ch)
    s_hi = _with_growth(lambda c_: c_.s3(hi), ch)
    return -p_lo * s_hi / c


_partial_green_reg = regular_in_z(_partial_green_raw)


def _riccati_ok(m, z, params):
    """Whether m^2/s + c s - 1/4 - Re z stays positive on (1, inf) with margin."""
    c = 0.25 * params.a**4 * params.omega**2
    return m >= RICCATI_MIN_M and 2.0 * m * math.sqrt(c) - 0.25 - complex(z).real > 1.0


def _riccati_rhs(m, z, c):
    # K = (xi - 1) y'/y in tau = log(xi - 1) for (xi^2-1) y'' + 2 xi y' = q y;
    # the second component is log y - (m/2) tau. Real and imaginary parts are
    # split so that a stiff real solver can be used.
    def f(tau, y):
        t = math.exp(tau)
        s = t * (t + 2.0)
        q = m * m / s + c * s - 0.25 - z
        k = complex(y[0], y[1])
        dk = k + t * t * q / s - 2.0 * (1.0 + t) * t * k / s - k * k
        return [dk.real, dk.imag, k.real - 0.5 * m, k.imag]

    return f


RICCATI_T_MIN = 1e-12
RICCATI_T_MAX = 50.0


def _riccati_solve(f, tau0, k0, taus):
    """States at the increasing (in integration direction) points taus."""
    k0 = complex(k0)
    r = integrate.ode(f).set_integrator("lsoda", rtol=RICCATI_RTOL, atol=RICCATI_ATOL, nsteps=100000)
    r.set_initial_value([k0.real, k0.imag, 0.0, 0.0], tau0)
    out = []
    for tau in taus:
        if tau != r.t:
            r.integrate(tau)
        if not r.successful():
            raise AccuracyError("log-derivative integration failed")
        y = r.y
        out.append((complex(y[0], y[1]), complex(y[2], y[3])))
    return out


def _outer_start(m, z, c, t):
    """Point beyond t where the decaying solution has fallen by RICCATI_DECAY nepers."""

    def kappa(t):
        s = t * (t + 2.0)
        return cmath.sqrt((m * m / s + c * s - 0.25 - z) / s)

    acc = 0.0
    while acc < RICCATI_DECAY:
        h = 0.05 * (1.0 + t)
        t += h
        acc += h * kappa(t).real
    return t, -t * kappa(t)


@functools.lru_cache(maxsize=8192)
def _riccati_values(m, z, lo, hi, params):
    """(log u(lo) - log u(hi), K_u(hi), K_v(hi)) with the t^(m/2) factor removed."""
    c = 0.25 * params.a**4 * params.omega**2
    f = _riccati_rhs(m, z, c)
    t_lo, t_hi = math.log(lo), math.log(hi)
    (_, w_lo), (k_u, w_hi) = _riccati_solve(f, math.log(RICCATI_T_MIN), 0.5 * m, (t_lo, t_hi))
    t_far, k_far = _outer_start(m, z, c, hi)
    ((k_v, _),) = _riccati_solve(f, math.log(t_far), k_far, (t_hi,))
    return w_lo - w_hi, k_u, k_v


def _partial_green_riccati(m, z, xi1, xi2, params):
    """G^m_z from the log-derivatives of the regular and decaying solutions.

    G = -[u(lo)/u(hi)] / [(hi^2 - 1)(v'/v - u'/u)(hi)]; the Riccati equations
    are integrated in their stable directions (outward for u, inward for v).
    """
    z = complex(z)
    lo, hi = min(xi1, xi2) - 1.0, max(xi1, xi2) - 1.0
    if not (lo >= 100.0 * RICCATI_T_MIN and hi <= RICCATI_T_MAX):
        raise AccuracyError(f"log-derivative route covers {100 * RICCATI_T_MIN:g} < xi - 1 <= {RICCATI_T_MAX:g}")
    log_ratio, k_u, k_v = _riccati_values(m, z, lo, hi, params)
    s_hi = hi * (hi + 2.0)
    return -cmath.exp(log_ratio) * (lo / hi) ** (0.5 * m) * hi / (s_hi * (k_v - k_u))


def partial_green(m, z, xi1, xi2, params, route="auto"):
    """Partial Green function G^m_z(xi1, xi2) of H~_m.

    ``route="auto"`` uses the log-derivative integration for channels
    m >= RICCATI_MIN_M below their potential barrier (where the series lose
    digits to the size of the Legendre terms) and the spheroidal series
    otherwise; ``"series"`` and ``"riccati"`` force one route.
    """
    m = abs(int(m))
    for xi in (xi1, xi2):
        if not xi >= 1.0:
            raise DomainError(f"xi must be >= 1, got {xi!r}")
    if m > 0 and min(xi1, xi2) == 1.0:
        return GreenValue(m, complex(z), 0.0j)
    if route in ("auto", "riccati") and _riccati_ok(m, z, params):
        try:
            value = _partial_green_riccati(m, complex(z), float(xi1), float(xi2), params)
            return GreenValue(m, complex(z), complex(value), "riccati")
        except AccuracyError:
            if route == "riccati":
                raise
    if route == "riccati":
        raise DomainError(f"channel m={m} does not qualify for the log-derivative route at z = {z}")
    value = _partial_green_reg(complex(z), m, float(xi1), float(xi2), params)
    return GreenValue(m, complex(z), complex(value))


def green_full(z, xi1, phi1, xi2, phi2, params, tol=1e-10, m_max=None):
    """Full H~ kernel with respect to the area element a^2 dxi dphi.

    (1/a^2)[G^0/(2 pi) + (1/pi) sum_{m>=1} G^m cos(m (phi1 - phi2))], summed
    until three consecutive channels each contribute below ``tol``.
    """
    a2 = params.a**2
    dphi = float(phi1) - float(phi2)
    total = partial_green(0, z, xi1, xi2, params).value / (2.0 * math.pi)
    if min(xi1, xi2) == 1.0:
        return total / a2
    limit = MAX_CHANNELS if m_max is None else int(m_max)
    quiet = 0
    for m in range(1, limit + 1):
        term = partial_green(m, z, xi1, xi2, params).value * math.cos(m * dphi) / math.pi
        total += term
        if m_max is None:
            quiet = quiet + 1 if abs(term) < tol * max(1.0, abs(total)) else 0
            if quiet >= 3:
                return total / a2
    if m_max is None:
        err = AccuracyError(f"channel sum not converged after {limit} channels")
        err.partial_sum = total / a2
        raise err
    return total / a2


def green_full_H(z, xi1, phi1, xi2, phi2, params, tol=1e-10, m_max=None):
    """H-scale kernel: a^2 times the H~ kernel at a^2 z."""
    a2 = params.a**2
    return a2 * green_full(a2 * complex(z), xi1, phi1, xi2, phi2, params, tol=tol, m_max=m_max)


def divergent_part(xi, params):
    """F(xi, 1) = -log(2 a^2 (xi - 1)) / (4 pi a^2)."""
    xi = float(xi)
    if not xi > 1.0:
        raise DomainError(f"divergent part needs xi > 1, got {xi!r}")
    a2 = params.a**2
    return -math.log(2.0 * a2 * (xi - 1.0)) / (4.0 * math.pi * a2)


def partial_green_matrix(m, z, xis, params):
    """Symmetric matrix of G^m_z over a list of radii (for diagnostics)."""
    n = len(xis)
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = partial_green(m, z, xis[i], xis[j], params).value
    return out
