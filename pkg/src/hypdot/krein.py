"""Krein Q-function, boundary data at the dot center and the perturbed Green function.

Q(z) is the regularized diagonal of the H~ kernel at xi = 1:

    Q(z) = -beta / (4 pi a^2 alpha) + log(2 a^2) / (4 pi a^2),

where S^{0(3)}_nu(xi) = alpha log(xi - 1) + beta + o(1) as xi -> 1+, and nu is
fixed by lambda^0_nu(theta) = -z - 1/4. On the physical scale
Q^H(z) = a^2 Q(a^2 z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import greens
from . import spheroidal as sph
from . import specfun
from .errors import AccuracyError, DomainError, PoleError

# Generic alpha/beta formulas lose digits like log10(1/|nu - n|) near an
# integer n; inside this distance the analytic continuation is used instead.
INTEGER_LIMIT_DIST = 1e-3
INTEGER_LIMIT_RADIUS = 1e-2
ALPHA_ZERO_TOL = 1e-13
POLE_CERTIFY = 1e6
FIT_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class AlphaBeta:
    """Coefficients of S^{0(3)}_nu(xi) ~ alpha log(xi - 1) + beta near xi = 1."""

    alpha: complex
    beta: complex
    nu: complex
    theta: float
    method: str = "generic"


@dataclass(frozen=True)
class ExtensionParam:
    """Strength chi = a^2 kappa of the center interaction; chi = inf is the Friedrichs case."""

    chi: float

    def __post_init__(self):
        chi = float(self.chi)
        if math.isnan(chi) or chi == -math.inf:
            raise DomainError(f"chi must be real or +inf, got {self.chi!r}")
        object.__setattr__(self, "chi", chi)

    @property
    def is_friedrichs(self):
        return self.chi == math.inf

    @classmethod
    def parse(cls, text):
        text = str(text).strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return cls(math.inf)
        return cls(float(text))

    def __str__(self):
        return "inf" if self.is_friedrichs else repr(self.chi)


@dataclass(frozen=True)
class BoundaryData:
    """Log coefficient f0 and regularized value f1 of a function at xi = 1."""

    f0: complex
    f1: complex
    residual: float = 0.0


@dataclass
class QTrace:
    """Samples of Q^H on a real grid with the poles located inside it."""

    grid: list
    q_values: list
    poles: list
    params: greens.ModelParams
    failures: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# alpha, beta
# ---------------------------------------------------------------------------


def _table(nu, theta):
    index = sph.SpheroidalIndex(0, nu, theta)
    lam = sph.lambda_eig(index).value
    return sph.auto_coefficients(index, lam)


def _safe_K(table):
    # Shift k so that Gamma(1 + nu + 2k) stays away from its poles.
    k = max(0, math.ceil((0.5 - (1.0 + complex(table.index.nu).real)) / 2.0))
    return sph.joining_K(table, k)


def _alpha_beta_generic(nu, theta):
    table = _table(nu, theta)
    s = sph.s_factor(table)
    k_nu = _safe_K(table)
    k_ref = _safe_K(table.reflected())
    pi = math.pi
    alpha = (
        1j
        * cmath.tan(nu * pi)
        / (2.0 * pi * s)
        * (cmath.exp(1j * pi * nu) * k_ref - cmath.exp(-1j * pi * (2.0 * nu + 1.5)) * k_nu)
    )
    beta = alpha * (-math.log(2.0) - 2.0 * specfun.digamma(1.0) + 2.0 * sph.psi_s(table) * s) + cmath.exp(
        -2j * pi * nu
    ) * k_nu / s
    return alpha, beta


def _alpha_beta_series(n, theta, h0):
    """Integer-degree formula with harmonic numbers h_k (h_0 given by ``h0``)."""
    table = _table(float(n), theta)
    s = sph.s_factor(table)
    k_n = sph.joining_K(table, max(0, -n))
    root = cmath.sqrt(complex(theta)) if theta >= 0 else 1j * math.sqrt(-theta)
    total = 0.0j
    for r, a in zip(table.r, table.values):
        k = n + 2 * int(r)
        if k < 0:
            continue
        h = h0 if k == 0 else float(np.sum(1.0 / np.arange(1, k + 1)))
        total += (-1) ** (int(r) % 2) * a * h
    alpha = 1j * s / (4.0 * root * k_n)
    beta = -alpha * math.log(2.0) + 1j * s * s / (2.0 * root * k_n) * total + k_n / s
    return alpha, beta


def alpha_beta(nu, theta, integer_method="limit", h0=1.0):
    """alpha, beta of S^{0(3)}_nu(xi, theta) = alpha log(xi - 1) + beta + o(1).

    Near an integer degree the generic closed form is replaced either by its
    analytic continuation (``integer_method="limit"``, a mean over a small
    circle in nu) or by the harmonic-number series (``"series"``, used only
    when |nu - n| < INTEGER_NU_TOL). The two differ; see the docs.
    """
    nu = complex(nu)
    theta = float(theta)
    if theta >= 0:
        raise DomainError("alpha_beta needs theta < 0")
    sph.SpheroidalIndex(0, nu, theta)  # validates the excluded set
    n = round(nu.real)
    dist = abs(nu - n)
    if integer_method == "series":
        if dist < sph.INTEGER_NU_TOL:
            alpha, beta = _alpha_beta_series(int(n), theta, h0)
            return AlphaBeta(alpha, beta, nu, theta, "series")
    elif integer_method != "limit":
        raise DomainError(f"unknown integer_method {integer_method!r}")
    if dist < INTEGER_LIMIT_DIST:
        pts = [
            nu + INTEGER_LIMIT_RADIUS * cmath.exp(2j * math.pi * (k + 0.5) / greens.AVERAGE_POINTS)
            for k in range(greens.AVERAGE_POINTS)
        ]
        vals = [_alpha_beta_generic(p, theta) for p in pts]
        alpha = sum(v[0] for v in vals) / len(vals)
        beta = sum(v[1] for v in vals) / len(vals)
        return AlphaBeta(alpha, beta, nu, theta, "limit")
    alpha, beta = _alpha_beta_generic(nu, theta)
    return AlphaBeta(alpha, beta, nu, theta, "generic")


# ---------------------------------------------------------------------------
# Q-function
# ---------------------------------------------------------------------------


def _exponent(z, theta):
    nu = sph.nu_from_lambda(0, theta, -complex(z) - 0.25, labeled=False)
    if sph._near_excluded(nu, greens.DEGENERATE_NU_DIST):
        raise greens.DegenerateExponent(f"nu = {nu:.6g} sits on the excluded set at z = {z}")
    return nu


def _q_core(z, params, scale):
    """-beta/(4 pi scale alpha) + log(2a^2)/(4 pi scale) at H~-scale parameter z."""
    nu = _exponent(z, params.theta)
    ab = alpha_beta(nu, params.theta)
    if not abs(ab.alpha) > ALPHA_ZERO_TOL * max(1.0, abs(ab.beta)):
        raise PoleError(f"Q has a pole at z = {z} (alpha = 0)", location=z, channel=0)
    return -ab.beta / (4.0 * math.pi * scale * ab.alpha) + math.log(2.0 * params.a**2) / (4.0 * math.pi * scale)


_q_core_reg = greens.regular_in_z(_q_core)


def _clean(value, z):
    # Q is real on the real axis; drop the rounding-level imaginary part there.
    if complex(z).imag == 0:
        return complex(value.real, 0.0) if abs(value.imag) < 1e-9 * (1.0 + abs(value)) else value
    return value


def q_function(z, params):
    """Q(z) of the H~ operator at spectral parameter z."""
    if not params.series_ok:
        return complex(q_function_H(complex(z) / params.a**2, params)) / params.a**2
    value = _q_core_reg(complex(z), params, params.a**2)
    return _clean(value, z)


def q_function_H(z, params):
    """Q^H(z) = a^2 Q(a^2 z), evaluated directly on the physical scale."""
    z = complex(z)
    if not params.series_ok:
        from . import liouville

        return liouville.q_function_H(z, params)
    value = _q_core_reg(params.a**2 * z, params, 1.0)
    return _clean(value, z)


def q_function_expanded(z, params):
    """Q(z) from the expanded closed form in Psi s_nu, s_nu and K_{-nu-1}/K_nu."""
    greens._require_series(params.theta)
    z = complex(z)
    nu = _exponent(z, params.theta)
    table = _table(nu, params.theta)
    s = sph.s_factor(table)
    ratio = _safe_K(table.reflected()) / _safe_K(table)
    a2 = params.a**2
    pi = math.pi
    value = (
        -(-math.log(2.0) - 2.0 * specfun.digamma(1.0) + 2.0 * sph.psi_s(table) * s) / (4.0 * pi * a2)
        + 1.0 / (2.0 * a2 * cmath.tan(nu * pi)) / (cmath.exp(1j * pi * (3.0 * nu + 1.5)) * ratio - 1.0)
        + math.log(2.0 * a2) / (4.0 * pi * a2)
    )
    return _clean(value, z)


def regularized_green_limit(z, params, xis=None):
    """Numerical lim_{xi->1+} [G_z(xi, 1) - F(xi, 1)] of the H~ kernel (for checks).

    Fits G - F on a mesh approaching xi = 1 with the basis
    {1, d log d, d, d^2 log d, d^2}, d = xi - 1.
    """
    if xis is None:
        xis = 1.0 + np.geomspace(1e-7, 1e-4, 10)
    d = np.asarray(xis, dtype=float) - 1.0
    vals = np.array([greens.green_full(z, x, 0.0, 1.0, 0.0, params) - greens.divergent_part(x, params) for x in xis])
    basis = np.vstack([np.ones_like(d), d * np.log(d), d, d * d * np.log(d), d * d]).T.astype(complex)
    coef = np.linalg.lstsq(basis, vals, rcond=None)[0]
    return complex(coef[0])


def _pole_refine(lo, hi, params, q_lo, q_hi):
    """Pole of Q^H in (lo, hi) where Q jumps from + to -; returns the root of 1/Q."""

    def inv(z):
        try:
            return 1.0 / q_function_H(z, params).real
        except PoleError:
            return 0.0

    f_lo, f_hi = 1.0 / q_lo, 1.0 / q_hi
    if f_lo * f_hi > 0:
        return None
    pole = optimize.brentq(inv, lo, hi, xtol=1e-13, rtol=1e-14, maxiter=200)
    eps = 1e-9 * max(1.0, abs(pole))
    try:
        left = q_function_H(pole - eps, params).real
        right = q_function_H(pole + eps, params).real
    except PoleError:
        return pole
    if abs(left) > POLE_CERTIFY and abs(right) > POLE_CERTIFY and left > 0 > right:
        return pole
    return None


def q_trace(params, z_from, z_to, n=200):
    """Q^H sampled on ``n`` points of [z_from, z_to], with certified poles.

    A pole sits where the otherwise increasing Q jumps from +inf to -inf; it
    is refined as a zero of 1/Q and accepted when |Q| exceeds POLE_CERTIFY on
    both sides.
    """
    if not (n >= 2 and z_to > z_from):
        raise DomainError("q_trace needs n >= 2 and z_to > z_from")
    grid = np.linspace(float(z_from), float(z_to), int(n))
    q = []
    failures = []
    for z in grid:
        try:
            q.append(q_function_H(z, params).real)
        except PoleError:
            q.append(math.nan)
            failures.append(float(z))
    poles = []
    for i in range(len(grid) - 1):
        q0, q1 = q[i], q[i + 1]
        if not (math.isfinite(q0) and math.isfinite(q1)):
            continue
        if q0 > 0 > q1:
            pole = _pole_refine(grid[i], grid[i + 1], params, q0, q1)
            if pole is not None:
                poles.append(float(pole))
    for z in failures:
        poles.append(z)
    poles.sort()
    return QTrace([float(g) for g in grid], q, poles, params, failures)


# ---------------------------------------------------------------------------
# Boundary data and the perturbed Green function
# ---------------------------------------------------------------------------


def boundary_data(xis, values, params):
    """(f0, f1) of samples f(xi) on a mesh approaching xi = 1.

    The samples are fitted by f0 F(xi, 1) + f1 plus the corrections
    sqrt(d), d log d, d, d^{3/2} with d = xi - 1, so that
    f0 = -4 pi a^2 lim f / log(2a^2 d) and f1 = lim [f - f0 F].
    """
    xis = np.asarray(xis, dtype=float)
    vals = np.asarray(values, dtype=complex)
    if xis.shape != vals.shape or xis.ndim != 1:
        raise DomainError("boundary_data needs matching one-dimensional xi and value arrays")
    d = xis - 1.0
    if np.any(d <= 0):
        raise DomainError("boundary_data needs xi > 1")
    if len(d) < 6 or d.min() > 1e-8:
        raise DomainError("mesh must reach xi - 1 <= 1e-8 with at least 6 points")
    a2 = params.a**2
    F = -np.log(2.0 * a2 * d) / (4.0 * math.pi * a2)
    basis = np.vstack([F, np.ones_like(d), np.sqrt(d), d * np.log(d), d, d**1.5]).T.astype(complex)
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    fit = basis @ coef
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    residual = float(np.max(np.abs(fit - vals)) / scale)
    if not residual <= FIT_RESIDUAL_TOL:
        raise AccuracyError(f"samples are not log-regular at xi = 1 (fit residual {residual:.1e})")
    return BoundaryData(complex(coef[0]), complex(coef[1]), residual)


def _as_chi(chi):
    return chi if isinstance(chi, ExtensionParam) else ExtensionParam(chi)


def perturbed_green(chi, z, xi1, phi1, xi2, phi2, params, tol=1e-10):
    """H-scale kernel of H(chi) by the Krein resolvent formula.

    G^{H(chi)} = G^H - [Q^H(z) - chi]^{-1} G^H(xi1, 0; 1, 0) G^H(1, 0; xi2, 0).
    For chi = inf this is G^H itself.
    """
    chi = _as_chi(chi)
    base = greens.green_full_H(z, xi1, phi1, xi2, phi2, params, tol=tol)
    if chi.is_friedrichs:
        return base
    if min(xi1, xi2) <= 1.0:
        raise DomainError("the perturbed kernel is evaluated away from the center")
    qh = q_function_H(z, params)
    denom = qh - chi.chi
    if denom == 0:
        raise PoleError(f"Q^H(z) = chi at z = {z}: eigenvalue of H(chi)", location=z, channel=0)
    g1 = greens.green_full_H(z, xi1, 0.0, 1.0, 0.0, params, tol=tol)
    g2 = greens.green_full_H(z, 1.0, 0.0, xi2, 0.0, params, tol=tol)
    return base - g1 * g2 / denom
