"""Point spectrum of the dot without impurity, H(inf), and with it, H(chi).

Energies are on the physical (H) scale; ``z_tilde`` is the H~-scale value a^2 z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import greens, krein, liouville
from .errors import AccuracyError, ConvergenceError, DomainError, PoleError

ROOT_XTOL = 1e-12
# Two energies closer than MATCH_TOL (relative to max(1, |z|)) are the same
# level; between MATCH_TOL and AMBIGUITY_TOL the assignment is flagged.
MATCH_TOL = 1e-9
AMBIGUITY_TOL = 1e-8
GAP_CHECK_XI = 3.0
GAP_CHECK_TOL = 1e-6
REFINE_SPLIT = 8
CLASSES = ("S1", "S2", "S3", "S4", "UNPERTURBED")


@dataclass(frozen=True)
class Eigenvalue:
    z: float
    z_tilde: float
    channel: int
    multiplicity: int
    cls: str = "UNPERTURBED"
    channels: tuple = ()
    ambiguous: bool = False


@dataclass
class SpectrumResult:
    params: greens.ModelParams
    chi: krein.ExtensionParam
    window: tuple
    eigenvalues: list
    diagnostics: dict = field(default_factory=dict)

    def energies(self):
        return [e.z for e in self.eigenvalues]


def scan_step(params):
    """Initial grid step on the H scale: min(0.1, flat spacing 2 omega / 8)."""
    return min(0.1, 2.0 * params.omega / 8.0)


def default_m_max(params, z_hi):
    """Largest m whose Liouville potential minimum omega sqrt(m^2 - 1/4) lies below z_hi.

    The potential (m^2 - 1/4)/(a^2 sinh^2) + (a^2 omega^2/4) sinh^2 is bounded
    below by that minimum, so higher channels have no levels under z_hi.
    """
    if z_hi <= 0:
        return 0
    return max(0, int(math.floor(math.sqrt((z_hi / params.omega) ** 2 + 0.25))))


def _check_window(window):
    lo, hi = (float(w) for w in window)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise DomainError(f"window must be a bounded interval, got {window!r}")
    return lo, hi


def _gap(m, zt, params, xi=greens.WRONSKIAN_REFS[0]):
    try:
        return greens.log_derivative_gap(m, zt, params, xi)
    except greens.DegenerateExponent:
        return greens.circle_average(lambda p: greens.log_derivative_gap(m, p, params, xi), zt)


def _series_roots(m, params, lo, hi, step, diag):
    """Zeros of the Wronskian in channel m from sign changes of the log-derivative gap."""
    a2 = params.a**2

    def f(z):
        return _gap(m, a2 * z, params).real

    def scan(grid):
        vals = [f(z) for z in grid]
        roots = []
        for i in range(len(grid) - 1):
            v0, v1 = vals[i], vals[i + 1]
            if v0 == 0:
                roots.append((float(grid[i]), True))
                continue
            if v0 * v1 > 0:
                continue
            z = optimize.brentq(f, grid[i], grid[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
            # Sign changes also occur at poles of the gap; a genuine zero of the
            # Wronskian makes the gap vanish at every reference radius.
            check = abs(_gap(m, a2 * z, params, GAP_CHECK_XI))
            roots.append((z, check < GAP_CHECK_TOL, grid[i], grid[i + 1]))
        return roots

    grid = np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / step)) + 1))
    out = []
    for item in scan(grid):
        if item[1]:
            out.append(item[0])
            continue
        diag.setdefault("rejected_poles", []).append((m, item[0]))
        if len(item) > 2:
            # A pole of the gap can mask a nearby zero: rescan the cell finely.
            fine = np.linspace(item[2], item[3], REFINE_SPLIT + 1)
            out.extend(z for z, ok, *_ in scan(fine) if ok)
    out.sort()
    for z0, z1 in zip(out, out[1:]):
        if z1 - z0 < 1e-8 * max(1.0, abs(z0)):
            raise AccuracyError(f"duplicate roots in channel {m} near z = {z0}")
    return out


def channel_levels(m, params, window, step=None, route="auto", diagnostics=None):
    """Eigenvalues of H(inf) in channel m inside ``window`` (H scale)."""
    lo, hi = _check_window(window)
    if step is None:
        step = scan_step(params)
    diag = {} if diagnostics is None else diagnostics
    if route == "auto":
        route = "series" if params.series_ok else "ode"
    if route == "series":
        return _series_roots(abs(int(m)), params, lo, hi, step, diag)
    if route == "ode":
        return liouville.channel_eigenvalues(abs(int(m)), params, lo, hi, step)
    raise DomainError(f"unknown route {route!r}")


def _merge(levels):
    """Group (z, m, mult) triples that coincide within MATCH_TOL into Eigenvalues."""
    levels = sorted(levels)
    out = []
    for z, m, k in levels:
        if out and abs(z - out[-1][0]) <= MATCH_TOL * max(1.0, abs(z)):
            zz, ms, kk = out[-1]
            out[-1] = (zz, ms + (m,), kk + k)
        else:
            out.append((z, (m,), k))
    return out


def unperturbed_spectrum(params, m_max=None, window=(0.0, 10.0), route="auto"):
    """Eigenvalues of H(inf) in ``window`` for channels |m| <= m_max.

    m = 0 levels are simple; each m != 0 level counts twice (+m and -m).
    """
    lo, hi = _check_window(window)
    if m_max is None:
        m_max = default_m_max(params, hi)
    m_max = int(m_max)
    if m_max < 0:
        raise DomainError("m_max must be >= 0")
    if route == "auto":
        route = "series" if params.series_ok else "ode"
    diag = {"route": route, "m_max": m_max, "step": scan_step(params)}
    triples = []
    for m in range(m_max + 1):
        for z in channel_levels(m, params, (lo, hi), route=route, diagnostics=diag):
            triples.append((z, m, 1 if m == 0 else 2))
    a2 = params.a**2
    eig = [Eigenvalue(z, a2 * z, ms[0], k, "UNPERTURBED", ms) for z, ms, k in _merge(triples)]
    return SpectrumResult(params, krein.ExtensionParam(math.inf), (lo, hi), eig, diag)


def _q_minus(chi, params):
    def g(z):
        return krein.q_function_H(z, params).real - chi

    return g


def _end_value(g, z, side, pole_like):
    """Value of Q - chi at an interval end, stepping off a pole when needed."""
    if not pole_like:
        return z, g(z)
    eps = 1e-3
    for _ in range(60):
        zz = z + side * eps
        try:
            val = g(zz)
        except PoleError:
            eps *= 0.5
            continue
        if (side > 0 and val < 0) or (side < 0 and val > 0):
            return zz, val
        eps *= 0.5
    raise ConvergenceError(f"could not bracket Q^H - chi next to the pole at {z}")


def _solve_level_equation(chi, params, lo, hi, poles):
    """Solutions of Q^H(z) = chi in [lo, hi]; one per monotone branch at most."""
    g = _q_minus(chi, params)
    edges = [(lo, False)] + [(p, True) for p in poles if lo < p < hi] + [(hi, False)]
    sols, counts = [], []
    for (left, lp), (right, rp) in zip(edges, edges[1:]):
        zl, vl = _end_value(g, left, +1, lp)
        zr, vr = _end_value(g, right, -1, rp)
        found = []
        if vl == 0:
            found.append(zl)
        elif vr == 0:
            found.append(zr)
        elif vl < 0 < vr:
            found.append(optimize.brentq(g, zl, zr, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
        counts.append(((left, right), len(found)))
        sols.extend(found)
    return sols, counts


def perturbed_spectrum(chi, params, window=(0.0, 10.0), m_max=None, route="auto", unperturbed=None):
    """Eigenvalues of H(chi) in ``window``, classified into S1..S4."""
    chi = chi if isinstance(chi, krein.ExtensionParam) else krein.ExtensionParam(chi)
    lo, hi = _check_window(window)
    if unperturbed is None:
        unperturbed = unperturbed_spectrum(params, m_max, (lo, hi), route)
    if chi.is_friedrichs:
        return unperturbed
    poles = [e.z for e in unperturbed.eigenvalues if 0 in e.channels]
    sols, counts = _solve_level_equation(chi.chi, params, lo, hi, poles)
    result = classify(unperturbed, sols, poles)
    result.chi = chi
    result.diagnostics.update({"poles": poles, "solutions": sols, "branch_counts": counts})
    return result


def _near(z, targets):
    """(index, relative distance) of the closest target, or (None, inf)."""
    best, dist = None, math.inf
    for i, t in enumerate(targets):
        d = abs(z - t) / max(1.0, abs(z))
        if d < dist:
            best, dist = i, d
    return best, dist


def classify(unperturbed, solutions, poles):
    """Multiplicities of H(chi) from the levels of H(inf), the poles of Q^H and the solutions of Q^H = chi.

    S1: solutions outside spec H(inf), multiplicity 1. S2: poles, k - 1.
    S3: levels that are neither, k. S4: solutions on a non-pole level, k + 1.
    Memberships decided inside the ambiguity band are flagged.
    """
    a2 = unperturbed.params.a ** 2
    levels = unperturbed.eigenvalues
    out = []
    removed = []
    used_sol = set()
    used_pole = set()
    for lev in levels:
        ip, dp = _near(lev.z, poles)
        js, ds = _near(lev.z, solutions)
        amb = MATCH_TOL < dp <= AMBIGUITY_TOL or MATCH_TOL < ds <= AMBIGUITY_TOL
        if dp <= MATCH_TOL:
            used_pole.add(ip)
            k = lev.multiplicity - 1
            if k > 0:
                out.append(Eigenvalue(lev.z, lev.z_tilde, lev.channel, k, "S2", lev.channels, amb))
            else:
                removed.append(lev.z)
        elif ds <= MATCH_TOL:
            used_sol.add(js)
            out.append(Eigenvalue(solutions[js], a2 * solutions[js], lev.channel, lev.multiplicity + 1, "S4", lev.channels, amb))
        else:
            out.append(Eigenvalue(lev.z, lev.z_tilde, lev.channel, lev.multiplicity, "S3", lev.channels, amb))
    for j, z in enumerate(solutions):
        if j in used_sol:
            continue
        _, d = _near(z, [lev.z for lev in levels])
        out.append(Eigenvalue(z, a2 * z, 0, 1, "S1", (0,), MATCH_TOL < d <= AMBIGUITY_TOL))
    stray = [p for i, p in enumerate(poles) if i not in used_pole]
    out.sort(key=lambda e: e.z)
    diag = {"removed_levels": removed, "unmatched_poles": stray}
    return SpectrumResult(unperturbed.params, unperturbed.chi, unperturbed.window, out, diag)
