"""Spheroidal functions of general characteristic exponent.

Solutions of

    (1 - xi^2) y'' - 2 xi y' + [lam + 4 theta (1 - xi^2) - mu^2 / (1 - xi^2)] y = 0

expanded in Bessel functions (radial ``S^(j)``) or Legendre functions
(angular ``Ps``/``Qs``). Everything is driven by the coefficient sequence
``a_r`` of the three-term recurrence

    gamma_r a_{r-1} + (beta_r + lam) a_r + alpha_r a_{r+1} = 0,

normalized here by ``a_0 = 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from . import specfun
from .errors import AccuracyError, ConvergenceError, DomainError, RangeError
from .specfun import BesselKind

# Coefficient window used when callers do not ask for one.
DEFAULT_WINDOW = 60
# Radial Bessel series is used for xi >= this; smaller xi go through the
# joining relations and the Legendre-series functions.
RADIAL_BESSEL_MIN_XI = 1.45
# |nu - n| below this counts as integer degree.
INTEGER_NU_TOL = 1e-6

_TRUNC_TOL = 1e-14
PREDICT_MISS = 0.1
CONTINUATION_MAX_DT = 0.1


def _is_real(z, tol=0.0):
    return abs(complex(z).imag) <= tol


def _theta_sqrt(theta):
    """theta^{1/2} on the principal branch; negative real theta gives i |theta|^{1/2}."""
    theta = complex(theta)
    if theta.imag == 0.0:
        theta = complex(theta.real, 0.0)
    return cmath.sqrt(theta)


def _theta_log(theta):
    theta = complex(theta)
    if theta.imag == 0.0:
        theta = complex(theta.real, 0.0)
    return cmath.log(theta)


def nearest_integer(nu):
    """Integer n with |nu - n| < INTEGER_NU_TOL, else None."""
    nu = complex(nu)
    n = round(nu.real)
    if abs(nu - n) < INTEGER_NU_TOL:
        return int(n)
    return None


@dataclass(frozen=True)
class SpheroidalIndex:
    """Order ``mu`` (integer >= 0), exponent ``nu`` and spheroidicity ``theta``."""

    mu: int
    nu: complex
    theta: complex

    def __post_init__(self):
        if int(self.mu) != self.mu or self.mu < 0:
            raise DomainError(f"order mu must be a non-negative integer, got {self.mu!r}")
        object.__setattr__(self, "mu", int(self.mu))
        nu = complex(self.nu)
        theta = complex(self.theta)
        if not (cmath.isfinite(nu) and cmath.isfinite(theta)):
            raise DomainError("non-finite spheroidal parameters")
        half = nu + 0.5
        if abs(half.imag) < 1e-12 and abs(half.real - round(half.real)) < 1e-12:
            raise DomainError(f"nu + 1/2 must not be an integer (nu = {nu.real:g})")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "theta", theta)

    def reflected(self):
        """Index of the partner exponent -nu-1 (same eigenvalue)."""
        return SpheroidalIndex(self.mu, -self.nu - 1.0, self.theta)


@dataclass(frozen=True)
class Lambda:
    value: complex
    index: SpheroidalIndex
    method: str = "continued-fraction"
    residual: float = 0.0


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients a_r for r in [-window, window] with a_0 = 1."""

    index: SpheroidalIndex
    lam: complex
    window: int
    values: np.ndarray = field(repr=False)
    tail_residual: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def r(self):
        return np.arange(-self.window, self.window + 1)

    def a(self, r):
        if abs(r) > self.window:
            return 0.0j
        return complex(self.values[r + self.window])

    def reflected(self):
        """Table for -nu-1: a^mu_{-nu-1, r} = a^mu_{nu, -r}."""
        return CoefficientTable(
            self.index.reflected(), self.lam, self.window, self.values[::-1].copy(), self.tail_residual
        )

    def recurrence_residual(self):
        """Max over interior r of |recurrence| / max |a_r|."""
        idx = self.index
        g, b, al = recurrence_terms(idx.mu, idx.nu, idx.theta, self.r)
        a = self.values
        res = (b[1:-1] + self.lam) * a[1:-1] + g[1:-1] * a[:-2] + al[1:-1] * a[2:]
        return float(np.max(np.abs(res)) / np.max(np.abs(a)))


# ---------------------------------------------------------------------------
# Recurrence and continued fraction
# ---------------------------------------------------------------------------


def recurrence_terms(mu, nu, theta, r):
    """(gamma_r, beta_r, alpha_r) of the coefficient recurrence for array ``r``."""
    n = nu + 2.0 * np.asarray(r, dtype=float)
    n = np.asarray(n, dtype=complex)
    gamma = (n - mu) * (n - mu - 1.0) / ((n - 1.5) * (n - 0.5)) * theta
    beta = -n * (n + 1.0) + (n * (n + 1.0) + mu * mu - 1.0) / ((n - 0.5) * (n + 1.5)) * 2.0 * theta
    alpha = (n + mu + 2.0) * (n + mu + 1.0) / ((n + 1.5) * (n + 2.5)) * theta
    return gamma, beta, alpha


def _terms_scalar(mu, nu, theta, r):
    n = nu + 2.0 * r
    gamma = (n - mu) * (n - mu - 1.0) / ((n - 1.5) * (n - 0.5)) * theta
    beta = -n * (n + 1.0) + (n * (n + 1.0) + mu * mu - 1.0) / ((n - 0.5) * (n + 1.5)) * 2.0 * theta
    alpha = (n + mu + 2.0) * (n + mu + 1.0) / ((n + 1.5) * (n + 2.5)) * theta
    return gamma, beta, alpha


def cf_depth(nu, theta, window=0):
    return max(window + 12, 30 + int(2.0 * math.sqrt(abs(theta))) + int(abs(complex(nu).real)) // 2)


def _tail_ratios(mu, nu, theta, lam, depth, r0=0):
    """Minimal-solution ratios by backward recurrence.

    Returns (up, down): up[k] = a_{r0+k+1}/a_{r0+k} for k = 0..depth-1 and
    down[k] = a_{r0-k-1}/a_{r0-k}.
    """
    k = np.arange(-depth, depth + 1)
    g, b, al = recurrence_terms(mu, nu, theta, r0 + k)
    b = (b + lam).tolist()
    g, al = g.tolist(), al.tolist()
    up = [0.0j] * depth
    down = [0.0j] * depth
    ratio = 0.0j
    for i in range(depth - 1, -1, -1):
        j = depth + 1 + i
        ratio = -g[j] / (b[j] + al[j] * ratio)
        up[i] = ratio
    ratio = 0.0j
    for i in range(depth - 1, -1, -1):
        j = depth - 1 - i
        ratio = -al[j] / (b[j] + g[j] * ratio)
        down[i] = ratio
    return up, down


def _match_parts(mu, nu, theta, lam, depth, r0):
    up, down = _tail_ratios(mu, nu, theta, lam, depth, r0)
    g, b, al = _terms_scalar(mu, nu, theta, r0)
    return b + lam, g * down[0], al * up[0]


def characteristic(mu, nu, theta, lam, depth=None, r0=0):
    """Continued-fraction characteristic function, matched at r = r0.

    Zero exactly when ``lam`` admits a solution of the recurrence that is
    minimal at both ends.
    """
    if depth is None:
        depth = cf_depth(nu, theta)
    return sum(_match_parts(mu, nu, theta, lam, depth, r0))


def characteristic_residual(mu, nu, theta, lam):
    """|characteristic| relative to the size of its individual terms."""
    nu = complex(nu)
    try:
        parts = _match_parts(mu, nu, theta, lam, cf_depth(nu, theta), 0)
    except ZeroDivisionError:
        # Exactly decoupled recurrence: step off the pole.
        nu = nu + 1e-12 * (1.0 + abs(nu))
        parts = _match_parts(mu, nu, theta, lam, cf_depth(nu, theta), 0)
    # The floor keeps roots where every part vanishes (decoupled blocks) from
    # being judged on round-off alone.
    scale = max(sum(abs(p) for p in parts), 1e-6 * (1.0 + abs(lam)))
    return abs(sum(parts)) / scale


def characteristic_in_nu(mu, nu, theta, lam, depth=None):
    """Characteristic function times the explicit r = 0 denominators.

    Same zeros in nu, but without the poles at nu in {3/2, 1/2, -3/2, -5/2}
    that otherwise sit next to roots close to the excluded set.
    """
    if depth is None:
        depth = cf_depth(nu, theta)
    b, g, al = _match_parts(mu, nu, theta, lam, depth, 0)
    return (b + g + al) * (nu - 1.5) * (nu - 0.5) * (nu + 1.5) * (nu + 2.5)


def _secant(f, x0, x1, tol, maxiter=60, max_step=None):
    f = _guarded(f)
    last_size = math.inf
    f0 = f(x0)
    f1 = f(x1)
    trace = [x0, x1]
    for _ in range(maxiter):
        denom = f1 - f0
        if denom == 0:
            break
        step = f1 * (x1 - x0) / denom
        if max_step is not None and abs(step) > max_step:
            step *= max_step / abs(step)
        x0, f0 = x1, f1
        x1 = x1 - step
        f1 = f(x1)
        trace.append(x1)
        if not cmath.isfinite(f1):
            break
        size = abs(step) / (1.0 + abs(x1))
        if size <= tol:
            return x1
        # Round-off floor: steps stop shrinking once tiny.
        if size < 1e-9 and len(trace) > 6 and size >= last_size:
            return x1
        last_size = size
    raise ConvergenceError("secant iteration did not converge", residual=abs(f1) if cmath.isfinite(f1) else None, trace=trace)


def _guarded(f):
    def g(x):
        try:
            return f(x)
        except ZeroDivisionError:
            raise ConvergenceError("recurrence pole hit during root search", trace=[x]) from None

    return g


def _continuation(solve_at, start, theta, real_pair):
    """Track a root from theta = 0 to ``theta``.

    ``solve_at(theta_k, guess, careful)`` polishes the root at theta_k;
    ``careful`` is set once the step has been cut down. When
    ``real_pair`` is set, the path bulges into the upper half theta-plane so
    that collisions of real branches are passed on a definite side.
    """
    theta = complex(theta)
    bulge = 0.05 * abs(theta) if real_pair else 0.0

    def path(t):
        return theta * t + 1j * bulge * math.sin(math.pi * t)

    t = 0.0
    dt = min(CONTINUATION_MAX_DT, 0.2 / max(abs(theta), 1e-300))
    prev_t, prev_x = None, None
    x = start
    while t < 1.0:
        t_new = min(1.0, t + dt)
        t_mid = 0.5 * (t + t_new)

        def predict(tt):
            if prev_x is None:
                return x
            return x + (x - prev_x) * (tt - t) / (t - prev_t)

        careful = dt < 0.05
        try:
            # Accept a step only when one full step and two half steps agree,
            # which rules out a jump onto a neighbouring branch.
            x_full = solve_at(path(t_new), predict(t_new), careful)
            x_mid = solve_at(path(t_mid), predict(t_mid), careful)
            x_new = solve_at(path(t_new), 2.0 * x_mid - x, careful)
            if abs(x_new - x_full) > 1e-8 * (1.0 + abs(x_new)):
                raise ConvergenceError("continuation jump")
            # A predictor that misses by a fair fraction of the step means the
            # step is too long to trust near an avoided crossing.
            if prev_x is not None and abs(x_new - predict(t_new)) > PREDICT_MISS * abs(x_new - x) + 1e-3 * (1.0 + abs(x)):
                raise ConvergenceError("continuation predictor miss")
        except ConvergenceError:
            dt *= 0.5
            if dt < 1e-7:
                raise ConvergenceError("continuation in theta stalled", trace=[x])
            continue
        prev_t, prev_x = t, x
        t, x = t_new, x_new
        dt = min(dt * 1.5, CONTINUATION_MAX_DT)
    return x


def lambda_eig(index, tol=1e-13):
    """Eigenvalue lambda^mu_nu(theta) from the matched continued fraction.

    The branch is the one continuing nu(nu+1) from theta = 0. For real nu and
    real theta the branch may have collided with a neighbour into a complex
    conjugate pair; the member with Im >= 0 is returned.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    mu, nu, theta = index.mu, index.nu, index.theta
    lam0 = nu * (nu + 1.0)
    if theta == 0:
        return Lambda(lam0, index, "continued-fraction", 0.0)
    real_theta = _is_real(theta)
    real_pair = real_theta and _is_real(nu)

    def solve_at(th, guess, careful=True):
        depth = cf_depth(nu, th)
        f = lambda lam: characteristic(mu, nu, th, lam, depth)
        return _secant(f, guess, guess * (1 + 1e-6) + 1e-6, tol)

    lam = _continuation(solve_at, lam0, theta, real_theta)
    if real_pair:
        lam = complex(lam.real, abs(lam.imag))
    lam = solve_at(theta, lam)
    if real_pair and lam.imag < 0:
        lam = lam.conjugate()
    residual = abs(characteristic(mu, nu, theta, lam))
    if not residual <= max(1e-9, 1e3 * tol) * (1.0 + abs(lam)):
        raise ConvergenceError("lambda continued fraction residual too large", residual=residual)
    return Lambda(lam, index, "continued-fraction", residual)


def _snap_real(z, tol=1e-11):
    z = complex(z)
    return complex(z.real, 0.0) if abs(z.imag) <= tol * (1.0 + abs(z)) else z


def canonical_nu(nu):
    """Representative of {nu, -nu-1} with Re nu >= -1/2 (Im nu >= 0 on the line)."""
    nu = complex(nu)
    other = -nu - 1.0
    if abs(nu.real + 0.5) < 1e-12:
        return nu if nu.imag >= 0 else other
    return nu if nu.real > -0.5 else other


class _Collapsed(Exception):
    pass


def _near_excluded(nu, tol=1e-5):
    half = complex(nu) + 0.5
    return abs(half - round(half.real)) < tol


def _orbit_candidates(nu, count=3):
    """Members of {nu + 2k} u {-nu-1 + 2k} with Re >= -1/2, smallest Re first."""
    out = []
    for base in (complex(nu), -complex(nu) - 1.0):
        shift = math.floor((base.real + 0.5) / 2.0)
        start = base - 2.0 * shift
        out.extend(start + 2.0 * k for k in range(count))
    out = [canonical_nu(_snap_real(c)) for c in out]
    out.sort(key=lambda c: (round(c.real, 9), -c.imag))
    return out


def nu_from_lambda(mu, theta, lambda_target, seed=None, tol=1e-12, labeled=True):
    """Characteristic exponent nu with lambda^mu_nu(theta) = lambda_target.

    A root of the matched continued fraction is found by secant iteration in
    nu, from ``seed`` when given, otherwise by continuing the theta = 0 root
    of nu(nu+1) = lambda. Any member of the orbit {nu + 2k, -nu-1 + 2k}
    solves the same recurrence; with ``labeled`` the member whose own
    eigenvalue branch equals the target is selected (smallest Re nu first),
    otherwise the representative with Re nu >= -1/2 is returned directly.
    """
    theta = complex(theta)
    lam = complex(lambda_target)
    if not (cmath.isfinite(theta) and cmath.isfinite(lam)):
        raise DomainError("non-finite input to nu_from_lambda")

    def solve_at(th, guess, careful=True):
        depth = cf_depth(guess, th) + 4

        def f(v):
            # Spurious double zeros sit on the excluded set; stop as soon as
            # an iterate is drawn onto it instead of converging slowly.
            if _near_excluded(v, 1e-5):
                raise _Collapsed(v)
            return characteristic_in_nu(mu, v, th, lam, depth)

        def run(x0, x1, max_step):
            try:
                return _secant(f, x0, x1, tol, max_step=max_step)
            except _Collapsed as exc:
                return exc.args[0]

        root = run(guess, guess + 1e-5 * (1 + abs(guess)), 0.5)
        if not _near_excluded(root):
            return root
        if not careful:
            raise ConvergenceError("root search collapsed onto the excluded set", trace=[root])
        # The de-poled function also vanishes on the excluded set; restart
        # around it and keep a genuine root.
        found = []
        for off in (0.3j, -0.3j, 0.3, -0.3, 0.05j, -0.05j, 0.05, -0.05):
            try:
                alt = run(root + off, root + off * 1.01, 0.25)
            except ConvergenceError:
                continue
            if not _near_excluded(alt):
                found.append(alt)
        if not found:
            raise ConvergenceError("root search collapsed onto the excluded set nu + 1/2 in Z", trace=[root])
        return min(found, key=lambda v: abs(v - guess))

    nu = None
    if seed is not None:
        seed = complex(seed)
        if abs(seed + 0.5) < 1e-8:
            raise DomainError("seed at the symmetry point nu = -1/2")
        try:
            nu = solve_at(theta, seed)
        except ConvergenceError:
            nu = None
    if nu is None:
        nu0 = -0.5 + cmath.sqrt(lam + 0.25)
        if _near_excluded(nu0, 1e-4):
            nu0 += 1e-3j
        if theta == 0:
            nu = nu0
        else:
            nu = _continuation(solve_at, nu0, theta, _is_real(theta) and _is_real(lam))
            nu = solve_at(theta, nu)
    nu = canonical_nu(_snap_real(nu))
    res = characteristic_residual(mu, nu, theta, lam)
    if not res <= 1e-9:
        raise ConvergenceError("nu_from_lambda: residual too large", residual=res, trace=[nu])
    if not labeled or theta == 0:
        return nu
    tried = []
    for cand in _orbit_candidates(nu):
        try:
            value = lambda_eig(SpheroidalIndex(mu, cand, theta)).value
        except (DomainError, ConvergenceError):
            continue
        tried.append(cand)
        if abs(value - lam) < 1e-9 * (1.0 + abs(lam)):
            return cand
    raise ConvergenceError("no exponent label reproduces the target eigenvalue", residual=res, trace=tried)


# ---------------------------------------------------------------------------
# Coefficients and derived constants
# ---------------------------------------------------------------------------


def coefficients(index, lam, window=DEFAULT_WINDOW):
    """Coefficient table a_r, |r| <= window, normalized a_0 = 1.

    Both tails are minimal solutions generated by backward recurrence from
    r = +-(window + extra) toward r = 0.
    """
    if isinstance(lam, Lambda):
        lam = lam.value
    lam = complex(lam)
    window = int(window)
    if window < 8:
        raise DomainError("coefficient window must be at least 8")
    mu, nu, theta = index.mu, index.nu, index.theta
    depth = cf_depth(nu, theta, window)
    up, down = _tail_ratios(mu, nu, theta, lam, depth)
    vals = np.empty(2 * window + 1, dtype=complex)
    vals[window] = 1.0
    for k in range(1, window + 1):
        vals[window + k] = vals[window + k - 1] * up[k - 1]
        vals[window - k] = vals[window - k + 1] * down[k - 1]
    peak = np.max(np.abs(vals))
    tail = float(max(abs(vals[0]), abs(vals[-1])) / peak)
    table = CoefficientTable(index, lam, window, vals, tail)
    if tail > 1e-15:
        raise AccuracyError(f"coefficient window {window} too small (tail {tail:.2e}); use a larger window")
    return table


def widened(table, window):
    """Same coefficients on a larger window."""
    return coefficients(table.index, table.lam, window)


def auto_coefficients(index, lam, min_window=DEFAULT_WINDOW, max_window=480):
    """Smallest window (doubling from ``min_window``) whose tail is negligible."""
    window = min_window
    while True:
        try:
            return coefficients(index, lam, window)
        except AccuracyError:
            if window >= max_window:
                raise
            window = min(2 * window, max_window)


def s_factor(table):
    """s = [sum_r (-1)^r a_r]^{-1}."""
    signs = np.where(table.r % 2 == 0, 1.0, -1.0)
    total = complex(np.sum(signs * table.values))
    if abs(total) < 1e-14 * np.max(np.abs(table.values)):
        raise DomainError("alternating coefficient sum vanishes; s-factor undefined")
    return 1.0 / total


def psi_s(table):
    """sum_r (-1)^r a^0_{nu,r} Psi(nu + 1 + 2r) over the window."""
    if table.index.mu != 0:
        raise DomainError("psi_s is defined for mu = 0")
    nu = table.index.nu
    total = 0.0j
    for r, a in zip(table.r, table.values):
        if a == 0:
            continue
        try:
            d = specfun.digamma(nu + 1.0 + 2.0 * r)
        except DomainError as exc:
            raise DomainError(f"psi_s: digamma pole in term r = {r}") from exc
        total += (-1) ** (r % 2) * a * d
    return total


def joining_K(table, k=0):
    """Joining factor K^mu_nu(theta) from the shifted double-series quotient.

    Independent of the integer shift ``k`` up to rounding.
    """
    idx = table.index
    mu, nu, theta = idx.mu, idx.nu, idx.theta
    k = int(k)
    s = s_factor(table)
    rs = table.r
    a = table.values
    signs = np.where(rs % 2 == 0, 1.0, -1.0)
    lower = rs <= k
    upper = rs >= k
    num = np.sum(
        signs[lower] * a[lower] * sc.rgamma(nu + k + rs[lower] + 1.5) / sc.gamma(k - rs[lower] + 1.0)
    )
    den = np.sum(
        signs[upper] * a[upper] * sc.rgamma(0.5 - nu - k - rs[upper]) / sc.gamma(rs[upper] - k + 1.0)
    )
    gamma_arg = 1.0 + nu - mu + 2 * k
    if specfun._is_nonpositive_integer(complex(gamma_arg), 1e-12):
        raise DomainError(f"joining_K: Gamma pole at shift k={k}; retry with a larger k")
    if den == 0:
        raise DomainError(f"joining_K: vanishing denominator at k={k}; retry with another k")
    power = cmath.exp((nu / 2.0 + k) * (_theta_log(theta) - math.log(4.0)))
    return (
        0.5
        * power
        * cmath.exp(sc.loggamma(gamma_arg))
        * cmath.exp(1j * math.pi * (nu + k))
        * s
        * num
        / den
    )


# ---------------------------------------------------------------------------
# Function evaluation
# ---------------------------------------------------------------------------


def _check_xi(xi):
    xi = float(xi)
    if not xi > 1.0:
        raise DomainError(f"spheroidal functions need xi > 1, got {xi!r}")
    return xi


def _truncated_sum(terms, center):
    """Sum outward from ``center``; check that the last terms are negligible."""
    total = complex(np.sum(terms))
    if not cmath.isfinite(total):
        raise RangeError("series terms overflow double precision")
    # Relative to the largest term: cancellation in the sum is rounding, not truncation.
    mags = np.abs(terms)
    scale = max(abs(total), float(np.max(mags)), 1e-300)
    edge = np.concatenate([mags[:3], mags[-3:]])
    resid = float(np.max(edge) / scale)
    if not resid <= _TRUNC_TOL:
        raise AccuracyError(f"series truncated with relative edge terms {resid:.1e}")
    return total, resid


def _bessel_window(xi):
    # Terms fall like xi^{-2 r} once r exceeds the coefficient scale.
    return int(min(150, max(16, math.ceil(36.0 / math.log(xi * xi)) + 8)))


def radial_S_bessel(kind, table, xi, deriv=False):
    """Radial function from the Bessel series (valid for xi > 1, efficient away from 1)."""
    xi = _check_xi(xi)
    idx = table.index
    mu, nu, theta = idx.mu, idx.nu, idx.theta
    if theta == 0:
        raise DomainError("radial functions need theta != 0")
    need = _bessel_window(xi)
    s = s_factor(table)
    root = _theta_sqrt(theta)
    zeta = 2.0 * root * xi
    w = table.window
    while True:
        lo, hi = -min(w, need), min(w, need)
        psi, dpsi = specfun.psi_bessel_ladder(kind, nu, zeta, lo, hi)
        a = table.values[lo + w : hi + w + 1]
        terms = a * psi
        try:
            total, _ = _truncated_sum(terms, -lo)
            break
        except AccuracyError:
            if need >= w:
                raise
            need = min(w, 2 * need)
    pref = (1.0 - xi**-2) ** (-0.5 * mu)
    val = pref * s * total
    if not deriv:
        return val
    dtotal = complex(np.sum(a * dpsi)) * 2.0 * root
    dpref = -0.5 * mu * (1.0 - xi**-2) ** (-0.5 * mu - 1.0) * 2.0 * xi**-3
    return val, dpref * s * total + pref * s * dtotal


def _legendre_terms(table, xi, lo, hi, second_kind=False, deriv=False):
    idx = table.index
    w = table.window
    r = np.arange(lo, hi + 1)
    a = table.values[lo + w : hi + w + 1]
    signs = np.where(r % 2 == 0, 1.0, -1.0)
    keep = a != 0
    degrees = idx.nu + 2.0 * r[keep]
    vals = np.zeros(r.size, dtype=complex)
    dvals = np.zeros(r.size, dtype=complex)
    if second_kind:
        vals[keep] = specfun.legendre_q_many(idx.mu, degrees, xi)
    elif deriv:
        vals[keep], dvals[keep] = specfun.legendre_p_many(idx.mu, degrees, xi, deriv=True)
    else:
        vals[keep] = specfun.legendre_p_many(idx.mu, degrees, xi)
    with np.errstate(over="ignore", invalid="ignore"):
        return signs * a * vals, signs * a * dvals


def angular_sum(table, xi, second_kind=False, deriv=False):
    """sum_r (-1)^r a_r P^mu_{nu+2r}(xi) (or Q), grown outward from r = 0."""
    xi = _check_xi(xi)
    half = min(table.window, 12)
    while True:
        terms, dterms = _legendre_terms(table, xi, -half, half, second_kind, deriv)
        try:
            total, _ = _truncated_sum(terms, half)
            break
        except AccuracyError:
            if half >= table.window:
                raise
            half = min(2 * half, table.window)
    if deriv:
        return total, complex(np.sum(dterms))
    return total


def angular_Ps(table, xi, deriv=False):
    """Angular function Ps^mu_nu(xi, theta) = sum (-1)^r a_r P^mu_{nu+2r}(xi)."""
    return angular_sum(table, xi, deriv=deriv)


def angular_Qs(table, xi):
    """Angular function Qs^mu_nu(xi, theta) = sum (-1)^r a_r Q^mu_{nu+2r}(xi)."""
    return angular_sum(table, xi, second_kind=True)


def radial_S1_joined(table, xi):
    """S^(1) through its joining relation with the angular functions."""
    idx = table.index
    mu, nu = idx.mu, idx.nu
    n = nearest_integer(nu)
    if n is not None:
        return joining_K(table) * angular_Ps(table, xi)
    k = _safe_shift(table)
    factor = cmath.sin((nu - mu) * math.pi) / math.pi * cmath.exp(-1j * math.pi * (nu + mu + 1.0))
    return factor * joining_K(table, k) * angular_Qs(table.reflected(), xi)


def _safe_shift(table):
    for k in (0, 1, -1, 2, -2):
        try:
            joining_K(table, k)
            return k
        except DomainError:
            continue
    raise DomainError("joining_K: no admissible shift")


def radial_S(kind, table, xi):
    """Radial spheroidal function S^{mu(kind)}_nu(xi, theta), xi > 1."""
    kind = BesselKind(kind)
    xi = _check_xi(xi)
    if xi >= RADIAL_BESSEL_MIN_XI:
        return radial_S_bessel(kind, table, xi)
    nu = table.index.nu
    s1 = radial_S1_joined(table, xi)
    if kind == BesselKind.J:
        return s1
    if nearest_integer(nu) is not None:
        raise DomainError("S^(2,3,4) near xi = 1 at integer nu: use the alpha/beta expansion or xi >= 1.5")
    s1_partner = radial_S1_joined(table.reflected(), xi)
    s3 = (s1_partner + 1j * cmath.exp(-1j * math.pi * nu) * s1) / (1j * cmath.cos(math.pi * nu))
    if kind == BesselKind.H1:
        return s3
    if kind == BesselKind.Y:
        return (s3 - s1) / 1j
    return 2.0 * s1 - s3


def spheroidal_residual(index, lam, f, xi, h=None):
    """Relative residual of the spheroidal ODE for callable ``f`` at ``xi``.

    Uses a 5-point central stencil; normalized by the sum of the magnitudes
    of the individual terms.
    """
    if h is None:
        h = 3e-3 * (xi - 1.0)
    fm2, fm1, f0, fp1, fp2 = (f(xi + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    one = 1.0 - xi * xi
    t1 = one * d2
    t2 = -2.0 * xi * d1
    t3 = (lam + 4.0 * index.theta * one - index.mu**2 / one) * f0
    return abs(t1 + t2 + t3) / (abs(t1) + abs(t2) + abs(t3))
