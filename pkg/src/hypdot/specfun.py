"""Scalar special functions of complex parameters.

Covers the pieces scipy does not provide for complex order/degree:
digamma (own implementation), the Riccati-type Bessel functions
``psi_j(nu, zeta) = sqrt(pi / (2 zeta)) Z_{nu + 1/2}(zeta)`` and Legendre
functions ``P^m_nu`` / ``Q^m_nu`` on the cut ``(1, inf)``. Gamma-function
values come from ``scipy.special`` (complex-capable ``loggamma``/``rgamma``).
"""

from __future__ import annotations

import cmath
import enum
import math

import numpy as np
from scipy import special as sc

from .errors import AccuracyError, DomainError, RangeError

EULER_GAMMA = 0.57721566490153286061

# Legendre-series switchover for Q: log series below, 1/xi^2 series above.
Q_SWITCH_XI = 2.5

_SERIES_TOL = 1e-17
_MAX_TERMS = 20000
# Largest tolerated ratio of the biggest series term to the sum.
J_CANCEL_MAX = 1e3

# Bernoulli-number coefficients B_{2k} / (2k) for the digamma asymptotic series.
_DIGAMMA_ASY = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


class BesselKind(enum.IntEnum):
    J = 1
    Y = 2
    H1 = 3
    H2 = 4


def _is_nonpositive_integer(z, tol=1e-14):
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def digamma(z):
    """Digamma function for complex ``z``.

    Reflection for ``Re z < 1/2``, upward shift until ``Re z >= 8``, then the
    Stirling-type asymptotic series.
    """
    z = complex(z)
    if not (cmath.isfinite(z)):
        raise DomainError(f"digamma: non-finite argument {z!r}")
    if _is_nonpositive_integer(z):
        raise DomainError(f"digamma: pole at {z.real:g}")
    if z.real < 0.5:
        # psi(z) = psi(1 - z) - pi cot(pi z)
        return digamma(1.0 - z) - math.pi / cmath.tan(math.pi * z)
    acc = 0.0
    while z.real < 8.0:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_ASY:
        series += c * power
        power *= inv2
    return acc + cmath.log(z) - 0.5 / z - series


def pochhammer(a, n):
    """Rising factorial ``(a)_n`` as an explicit product (n >= 0)."""
    out = 1.0 + 0.0j
    for k in range(n):
        out *= a + k
    return out


# ---------------------------------------------------------------------------
# Bessel functions of complex order
# ---------------------------------------------------------------------------


def _log(z):
    """Principal logarithm with arg in (-pi, pi]; a signed zero imaginary part is ignored."""
    z = complex(z)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)
    return cmath.log(z)


def _bessel_j_orders(orders, zeta):
    """J_s(zeta) for an array of complex orders by the ascending series.

    The series cancels when |Re zeta| is large; past J_CANCEL_MAX lost digits
    real orders are handed to scipy and complex orders raise AccuracyError.
    """
    orders = np.asarray(orders, dtype=complex)
    u = -0.25 * zeta * zeta
    term = sc.rgamma(orders + 1.0)
    total = term.copy()
    peak = np.abs(term)
    n_min = int(2.0 * abs(zeta)) + 5
    quiet = 0
    for k in range(1, _MAX_TERMS):
        term = term * u / (k * (orders + k))
        total += term
        peak = np.maximum(peak, np.abs(term))
        if k > n_min:
            small = np.abs(term) <= _SERIES_TOL * np.maximum(np.abs(total), 1e-300)
            quiet = quiet + 1 if np.all(small) else 0
            if quiet >= 3:
                break
    else:
        raise AccuracyError("Bessel J series did not converge")
    lost = peak > J_CANCEL_MAX * np.abs(total)
    out = np.exp(orders * _log(0.5 * zeta)) * total
    if np.any(lost):
        if np.any(np.abs(orders[lost].imag) > 0):
            raise AccuracyError(f"Bessel J series cancels at zeta = {zeta:.4g} for complex order")
        out[lost] = sc.jv(orders[lost].real, zeta)
    return out


def _k_trapezoid(order, w):
    """K_order(w), Re w > 0, from int_0^inf exp(-w cosh t) cosh(order t) dt.

    The integrand is analytic in a strip and decays doubly exponentially, so
    the trapezoid rule converges geometrically in 1/h.
    """
    order = complex(order)
    w = complex(w)
    if w.real <= 0:
        raise DomainError("K integral needs Re(w) > 0")
    s = abs(order.real)
    t_end = 1.0
    while w.real * (math.cosh(t_end) - 1.0) - s * t_end < 46.0:
        t_end += 0.25
        if t_end > 60.0:
            raise RangeError("K integral: argument too small for quadrature")
    # strip half-width where exp(-w cosh t) still decays
    d = min(1.0, 0.8 * math.atan2(w.real, abs(w.imag)))
    h = 2.0 * math.pi * d / (42.0 + d * abs(order.imag) + abs(w) * (1.0 - math.cos(d)))
    n = int(math.ceil(t_end / h))
    t = np.linspace(0.0, t_end, n + 1)
    # Scale out exp(-w) to keep large-argument values representable.
    f = np.exp(-w * (np.cosh(t) - 1.0)) * np.cosh(order * t)
    h = t[1] - t[0]
    val = h * (0.5 * f[0] + f[1:].sum())
    return val, -w  # value * exp(-w)


def _bessel_k_ladder(base, kmin, kmax, w):
    """K_{base+k}(w) for k in [kmin, kmax] (scaled by exp(w)), Re w > 0.

    Three quadratures seed upward recurrences in |order|, the stable direction
    for K.
    """
    frac = base - round(base.real)
    shift = int(round(base.real))
    lo, hi = kmin + shift, kmax + shift
    values = {}
    k0, _ = _k_trapezoid(frac, w)
    k1, _ = _k_trapezoid(frac + 1.0, w)
    if hi >= 0:
        values[0] = k0
        values[1] = k1
        prev, cur = k0, k1
        for j in range(1, hi):
            nxt = prev + 2.0 * (frac + j) / w * cur
            values[j + 1] = nxt
            prev, cur = cur, nxt
    if lo < 0:
        # K_{frac - j} = K_{-frac + j}
        km1, _ = _k_trapezoid(1.0 - frac, w)
        values[0] = k0
        values[-1] = km1
        prev, cur = k0, km1
        for j in range(1, -lo):
            nxt = prev + 2.0 * (-frac + j) / w * cur
            values[-(j + 1)] = nxt
            prev, cur = cur, nxt
    out = np.array([values[j] for j in range(lo, hi + 1)], dtype=complex)
    if not np.all(np.isfinite(out)):
        raise RangeError("K ladder overflow; reduce the order window")
    return out


def _uses_k_channel(zeta, sign):
    zeta = complex(zeta)
    return sign * zeta.imag > 0.2 * abs(zeta)


def bessel_orders(kind, base, kmin, kmax, zeta):
    """Cylinder function of ``kind`` for orders ``base + k``, k in [kmin, kmax]."""
    kind = BesselKind(kind)
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("Bessel functions: zero argument")
    base = complex(base)
    ks = np.arange(kmin, kmax + 1)
    orders = base + ks
    if kind == BesselKind.H1 and _uses_k_channel(zeta, +1):
        k = _bessel_k_ladder(base, kmin, kmax, -1j * zeta)
        # H1_s(zeta) = 2/(pi i) exp(-i pi s / 2) K_s(-i zeta); ladder carries exp(i zeta)
        return (2.0 / (math.pi * 1j)) * np.exp(-0.5j * math.pi * orders + 1j * zeta) * k
    if kind == BesselKind.H2 and _uses_k_channel(zeta, -1):
        k = _bessel_k_ladder(base, kmin, kmax, 1j * zeta)
        return (2.0j / math.pi) * np.exp(0.5j * math.pi * orders - 1j * zeta) * k
    j_pos = _bessel_j_orders(orders, zeta)
    if kind == BesselKind.J:
        return j_pos
    j_neg = _bessel_j_orders(-orders, zeta)
    sin = np.sin(math.pi * orders)
    if np.any(np.abs(sin) < 1e-13):
        raise DomainError("integer Bessel order: nu + 1/2 must not be an integer")
    if kind == BesselKind.Y:
        return (j_pos * np.cos(math.pi * orders) - j_neg) / sin
    if kind == BesselKind.H1:
        return (j_neg - np.exp(-1j * math.pi * orders) * j_pos) / (1j * sin)
    return (j_neg - np.exp(1j * math.pi * orders) * j_pos) / (-1j * sin)


def psi_bessel_ladder(kind, nu, zeta, r_lo, r_hi):
    """``psi^(kind)_{nu+2r}(zeta)`` and its zeta-derivative for r in [r_lo, r_hi].

    Returns two arrays indexed by ``r - r_lo``.
    """
    zeta = complex(zeta)
    nu = complex(nu)
    # orders nu + 1/2 + k for k = 2 r_lo - 1 .. 2 r_hi
    vals = bessel_orders(kind, nu + 0.5, 2 * r_lo - 1, 2 * r_hi, zeta)
    scale = cmath.exp(0.5 * (math.log(math.pi / 2.0) - _log(zeta)))
    psi_all = scale * vals  # psi_{nu + k}, k = 2 r_lo - 1 .. 2 r_hi
    psi = psi_all[1::2]
    psi_lower = psi_all[0::2]
    degrees = nu + 2.0 * np.arange(r_lo, r_hi + 1)
    dpsi = psi_lower - (degrees + 1.0) / zeta * psi
    return psi, dpsi


def psi_bessel(kind, degree, arg):
    """``psi^(j)_nu(zeta) = sqrt(pi/(2 zeta)) Z_{nu+1/2}(zeta)`` for Z = J, Y, H1, H2."""
    arg = complex(arg)
    if arg == 0:
        raise DomainError("psi_bessel: zero argument")
    psi, _ = psi_bessel_ladder(kind, degree, arg, 0, 0)
    val = complex(psi[0])
    if not cmath.isfinite(val):
        raise RangeError(f"psi_bessel overflow at |zeta|={abs(arg):.3g}")
    return val


# ---------------------------------------------------------------------------
# Legendre functions on (1, inf)
# ---------------------------------------------------------------------------


def _check_xi(xi):
    xi = float(xi)
    if not xi > 1.0:
        raise DomainError(f"Legendre functions on the cut need xi > 1, got {xi!r}")
    return xi


def _sum_series(ratio_fn, x, n_deg, min_terms, want_deriv):
    """Sum sum_k c_k x^k (and sum_k k c_k x^(k-1)) with c_0 = 1, vectorized over degrees."""
    term = np.ones(n_deg, dtype=complex)
    total = term.copy()
    dtotal = np.zeros(n_deg, dtype=complex)
    quiet = 0
    for k in range(0, _MAX_TERMS):
        # term = c_{k+1} x^{k+1}; carried as one product to avoid overflow
        term = term * ratio_fn(k) * x
        total += term
        if want_deriv:
            dtotal += (k + 1) * term / x
        if k > min_terms:
            small = np.abs(term) <= _SERIES_TOL * np.maximum(np.abs(total), 1e-300)
            quiet = quiet + 1 if np.all(small) else 0
            if quiet >= 3:
                return total, dtotal
    raise AccuracyError("hypergeometric series did not converge")


def legendre_p_many(m, degrees, xi, deriv=False):
    """P^m_nu(xi) for an array of complex degrees; optional xi-derivative.

    Pfaff-transformed Gauss series in u = (xi-1)/(xi+1), convergent on all
    of (1, inf).
    """
    xi = _check_xi(xi)
    if m < 0:
        raise DomainError("negative Legendre order not supported")
    nu = np.atleast_1d(np.asarray(degrees, dtype=complex))
    # P_nu = P_{-nu-1}; the series is better behaved for Re nu >= -1/2.
    nu = np.where(nu.real < -0.5, -nu - 1.0, nu)
    u = (xi - 1.0) / (xi + 1.0)
    min_terms = int(np.max(np.abs(nu))) + m + 4
    ratio = lambda k: (m - nu + k) * (-nu + k) / ((m + 1.0 + k) * (k + 1.0))
    f, df = _sum_series(ratio, u, nu.size, min_terms, deriv)
    # (nu - m + 1)_{2m} / (2^m m!), with the denominator interleaved as 2k
    coef = np.ones_like(nu)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(2 * m):
            coef = coef * (nu - m + 1.0 + j)
            if j % 2:
                coef = coef / (j + 1.0)
    pref = (xi * xi - 1.0) ** (0.5 * m) * np.exp((nu - m) * math.log(0.5 * (1.0 + xi)))
    with np.errstate(over="ignore", invalid="ignore"):
        val = coef * pref * f
    if not deriv:
        return val
    dpref = pref * (m * xi / (xi * xi - 1.0) + (nu - m) / (1.0 + xi))
    with np.errstate(over="ignore", invalid="ignore"):
        dval = coef * (dpref * f + pref * df * 2.0 / (1.0 + xi) ** 2)
    return val, dval


def _q_far(m, nu, xi):
    """Q^m_nu(xi) from the 1/xi^2 hypergeometric series (Bateman phase e^{i m pi})."""
    v = 1.0 / (xi * xi)
    a = 0.5 * (nu + m + 2.0)
    b = 0.5 * (nu + m + 1.0)
    c = nu + 1.5
    min_terms = int(np.max(np.abs(nu))) + m + 4
    ratio = lambda k: (a + k) * (b + k) / ((c + k) * (k + 1.0))
    f, _ = _sum_series(ratio, v, nu.size, min_terms, False)
    pref = (
        (-1.0) ** m
        * math.sqrt(math.pi)
        * np.exp(sc.loggamma(nu + m + 1.0))
        * sc.rgamma(nu + 1.5)
        * np.exp(-(nu + 1.0) * math.log(2.0))
        * (xi * xi - 1.0) ** (0.5 * m)
        * np.exp(-(nu + m + 1.0) * math.log(xi))
    )
    return pref * f


def _q_near(m, nu, xi):
    """Q^m_nu(xi) near xi = 1: logarithmic Frobenius series in w = (1 - xi)/2.

    Q_nu = -1/2 P_nu log((xi-1)/2) + sum_k g_k w^k; the order-m function is
    (xi^2-1)^{m/2} d^m/dxi^m of it, differentiated termwise.
    """
    w = 0.5 * (1.0 - xi)
    log_mw = math.log(-w)
    n = nu.size
    psi_nu1 = np.array([digamma(x + 1.0) for x in nu])
    # p_k = (-nu)_k (nu+1)_k / k!^2 and e_k = [(-nu)_k (nu+1)_k]' / k!^2 by
    # their ratios, so nothing overflows; e_k stays finite at integer nu.
    p_k = np.ones(n, dtype=complex)
    e_k = np.zeros(n, dtype=complex)
    harm = 0.0
    # d^m/dw^m applied termwise; factor (-1/2)^m converts to d/dxi.
    total = np.zeros(n, dtype=complex)
    min_terms = int(np.max(np.abs(nu))) + m + 4
    quiet = 0
    for k in range(0, _MAX_TERMS):
        if k > 0:
            step = (k - 1 - nu) * (nu + k)
            e_k = (step * e_k + (2 * k - 1) * p_k) / (k * k)
            p_k = p_k * step / (k * k)
            harm += 1.0 / k
        d_k = e_k - 2.0 * harm * p_k
        g_k = p_k * (-EULER_GAMMA - psi_nu1) - 0.5 * d_k
        if k >= m:
            fall = float(math.perm(k, m))
            h_diff = harm - sum(1.0 / j for j in range(1, k - m + 1))
            wpow = w ** (k - m)
            term = -0.5 * p_k * fall * wpow * (log_mw + h_diff) + g_k * fall * wpow
        else:
            term = -0.5 * p_k * (-1.0) ** (m - k - 1) * math.factorial(k) * math.factorial(m - k - 1) * w ** (k - m)
        total += term
        if k > min_terms:
            small = np.abs(term) <= _SERIES_TOL * np.maximum(np.abs(total), 1e-300)
            quiet = quiet + 1 if np.all(small) else 0
            if quiet >= 3:
                break
    else:
        raise AccuracyError("Legendre Q log series did not converge")
    return (-0.5) ** m * (xi * xi - 1.0) ** (0.5 * m) * total


def legendre_q_many(m, degrees, xi):
    """Q^m_nu(xi) for an array of complex degrees (second kind, cut (1, inf))."""
    xi = _check_xi(xi)
    if m < 0:
        raise DomainError("negative Legendre order not supported")
    nu = np.atleast_1d(np.asarray(degrees, dtype=complex))
    for x in nu:
        if _is_nonpositive_integer(x + m + 1.0, 1e-12):
            raise DomainError(f"Q^{m}_nu undefined: nu + m + 1 = {x + m + 1:.6g} is a Gamma pole")
        if _is_nonpositive_integer(x + 1.0, 1e-12):
            raise DomainError(f"Q^{m}_nu: degree {x:.6g} not supported")
    out = np.empty(nu.size, dtype=complex)
    # Degrees left of Re nu = -1/2 through Q_{-e-1} = Q_e - pi cot(e pi) P_e.
    refl = nu.real < -0.5
    if np.any(refl):
        e = -nu[refl] - 1.0
        if np.any(np.abs(np.sin(np.pi * e)) < 1e-13):
            raise DomainError(f"Q^{m}_nu at integer degree below -1/2 not supported")
        cot = np.cos(np.pi * e) / np.sin(np.pi * e)
        out[refl] = legendre_q_many(m, e, xi) - np.pi * cot * legendre_p_many(m, e, xi)
        if np.all(refl):
            return out
    # The log series cancels like P_nu / Q_nu ~ exp(2 Re(nu) acosh xi); send
    # large positive degrees to the 1/xi^2 series.
    growth = 2.0 * np.maximum(nu.real + 0.5, 0.0) * math.acosh(xi)
    near = (growth < 8.0) & (xi < Q_SWITCH_XI) & ~refl
    far = ~near & ~refl
    if np.any(near):
        out[near] = _q_near(m, nu[near], xi)
    if np.any(far):
        out[far] = _q_far(m, nu[far], xi)
    return out


def legendre_P(order, degree, xi):
    """First-kind Legendre function P^m_nu(xi), xi > 1."""
    return complex(legendre_p_many(int(order), [degree], xi)[0])


def legendre_Q(order, degree, xi):
    """Second-kind Legendre function Q^m_nu(xi), xi > 1 (e^{i m pi} phase convention)."""
    return complex(legendre_q_many(int(order), [degree], xi)[0])
