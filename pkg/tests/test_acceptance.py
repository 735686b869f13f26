"""Acceptance criteria AC1..AC12; each test records one PASS/FAIL line."""

import cmath
import math
import subprocess
import sys

import numpy as np
import pytest

from hypdot import cli, greens, krein, oracle, spectrum, spheroidal as sph
from hypdot.specfun import BesselKind

P = greens.ModelParams(1.0, 1.0)


@pytest.fixture
def report(acceptance_log):
    def record(n, ok, detail):
        line = f"AC{n} {'PASS' if ok else 'FAIL'}: {detail}"
        acceptance_log.append(line)
        print(line)
        assert ok, line

    return record


def table(nu, theta, mu=0):
    i = sph.SpheroidalIndex(mu, nu, theta)
    return sph.coefficients(i, sph.lambda_eig(i))


def random_pairs(seed, n=20):
    rng = np.random.default_rng(seed)
    return [(float(rng.uniform(-2.0, 2.0)), float(rng.uniform(-10.0, 0.0))) for _ in range(n)]


def test_ac1_legendre_reduction(report):
    err, coef = 0.0, 0.0
    for nu in (0.3, 1.7, -0.25):
        i = sph.SpheroidalIndex(0, nu, 0.0)
        lam = sph.lambda_eig(i)
        err = max(err, abs(lam.value - nu * (nu + 1)))
        t = sph.coefficients(i, lam)
        delta = np.where(t.r == 0, 1.0, 0.0)
        coef = max(coef, float(np.max(np.abs(t.values - delta))))
    report(1, err < 1e-12 and coef == 0.0, f"max |lambda - nu(nu+1)| = {err:.2e} (< 1e-12), max |a_r - delta_r0| = {coef:.1e}")


def test_ac2_lambda_symmetry_and_reality(report):
    sym, im = 0.0, 0.0
    for nu, theta in random_pairs(11):
        a = sph.lambda_eig(sph.SpheroidalIndex(0, nu, theta)).value
        b = sph.lambda_eig(sph.SpheroidalIndex(0, -nu - 1.0, theta)).value
        sym = max(sym, abs(a - b))
        im = max(im, abs(complex(a).imag))
    report(2, sym < 1e-9 and im < 1e-11, f"max |lambda_nu - lambda_-nu-1| = {sym:.2e} (< 1e-9), max |Im lambda| = {im:.2e} (< 1e-11)")


def test_ac3_tridiagonal_oracle(report):
    err = 0.0
    for nu, theta in random_pairs(12):
        lam = sph.lambda_eig(sph.SpheroidalIndex(0, nu, theta)).value
        err = max(err, abs(lam - oracle.tridiag_branch(nu, theta, R=40)))
    report(3, err < 1e-10, f"max |lambda_cf - lambda_tridiag| = {err:.2e} over 20 points, |theta| <= 10 (< 1e-10)")


def test_ac4_tail_law(report):
    devs = {}
    for theta in (-1.0, -4.0, -16.0):
        t = table(0.3, theta)
        ratio = 30**2 * t.a(30) / t.a(29)
        devs[theta] = abs(ratio / (theta / 4.0) - 1.0)
    ok = all(d < 0.01 for d in devs.values())
    detail = ", ".join(f"theta={th:g}: {100 * d:.2f}%" for th, d in devs.items())
    report(4, ok, f"|r^2 a_r/a_(r-1) / (theta/4) - 1| at r=30: {detail} (< 1%)")


def test_ac5_function_identities(report):
    theta, nu = -1.0, 0.3
    t = table(nu, theta)
    u = t.reflected()
    t0 = table(0.0, theta)
    s3_err = join_err = 0.0
    for xi in (1.5, 2.0, 3.0, 5.0):
        s3 = sph.radial_S_bessel(BesselKind.H1, t, xi)
        s1 = sph.radial_S_bessel(BesselKind.J, t, xi)
        s1r = sph.radial_S_bessel(BesselKind.J, u, xi)
        rhs = (s1r + 1j * cmath.exp(-1j * math.pi * nu) * s1) / (1j * math.cos(math.pi * nu))
        scale = max(abs(s3), abs(s1r), abs(s1)) / abs(math.cos(math.pi * nu))
        s3_err = max(s3_err, abs(s3 - rhs) / scale)
        k = sph.joining_K(t, 0)
        qs = sph.angular_Qs(u, xi)
        j1 = math.sin(nu * math.pi) / math.pi * cmath.exp(-1j * math.pi * (nu + 1)) * k * qs
        j0 = sph.joining_K(t0, 0) * sph.angular_Ps(t0, xi)
        s10 = sph.radial_S_bessel(BesselKind.J, t0, xi)
        join_err = max(join_err, abs(s1 - j1) / abs(s1), abs(s10 - j0) / abs(s10))
    ks = [sph.joining_K(t, k) for k in (-1, 0, 1)]
    k_err = max(abs(x - ks[1]) for x in ks) / abs(ks[1])
    ok = s3_err < 1e-8 and join_err < 1e-8 and k_err < 1e-8
    report(5, ok, f"S3 identity {s3_err:.2e}, joining relations {join_err:.2e}, K shift spread {k_err:.2e} (all < 1e-8)")


def test_ac6_ode_residuals(report):
    theta, nu = -1.0, 0.3
    i = sph.SpheroidalIndex(0, nu, theta)
    lam = sph.lambda_eig(i).value
    t = sph.coefficients(i, lam)
    funcs = {
        "Ps": lambda x: sph.angular_Ps(t, x),
        "Qs": lambda x: sph.angular_Qs(t, x),
        "S1": lambda x: sph.radial_S(1, t, x),
        "S3": lambda x: sph.radial_S(3, t, x),
    }
    worst = {}
    for name, f in funcs.items():
        worst[name] = max(sph.spheroidal_residual(i, lam, f, xi) for xi in (1.2, 1.6, 2.5, 4.0, 7.0, 10.0))
    ok = all(w < 1e-7 for w in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(6, ok, f"max relative residual on [1.2, 10]: {detail} (< 1e-7)")


def test_ac7_green_contract(report):
    z = 3.1
    sym = all(
        greens.partial_green(m, z, 1.7, 2.3, P).value == greens.partial_green(m, z, 2.3, 1.7, P).value for m in (0, 1, 2)
    )
    sym = sym and greens.green_full(z, 1.5, 0.3, 2.0, 1.1, P) == greens.green_full(z, 2.0, 1.1, 1.5, 0.3, P)
    jump = 0.0
    xp, h = 2.0, 1e-5
    for m in (0, 1, 2):

        def g(x):
            return greens.partial_green(m, z, x, xp, P).value

        right = (-3 * g(xp) + 4 * g(xp + h) - g(xp + 2 * h)) / (2 * h)
        left = (3 * g(xp) - 4 * g(xp - h) + g(xp - 2 * h)) / (2 * h)
        jump = max(jump, abs((xp * xp - 1) * (right - left) + 1))
    spread = max(greens.wronskian_spread(m, zz, P) for m in (0, 1, 2) for zz in (0.7, 3.1, 2.0 + 1.0j))
    ok = sym and jump < 1e-6 and spread < 1e-8
    report(7, ok, f"symmetry exact: {sym}, jump error {jump:.1e} (< 1e-6), Wronskian spread {spread:.1e} (< 1e-8)")


def test_ac8_q_regularization(report):
    err = 0.0
    for z in (2.0, 3.0, 4.0, 5.0, 5.5):
        err = max(err, abs(krein.q_function(z, P) - krein.regularized_green_limit(z, P)))
    report(8, err < 1e-6, f"max |Q - lim(G - F)| at 5 z between the first two poles = {err:.1e} (< 1e-6)")


def test_ac9_spectral_consistency(report):
    window = (0.0, 13.0)
    zeros = spectrum.channel_levels(0, P, window, route="series")[:3]
    poles = krein.q_trace(P, -0.5, 13.0, 130).poles[:3]
    shots = oracle.shoot_eigen(0, P, window)[:3]
    n = min(len(zeros), len(poles), len(shots))
    diff = max(max(abs(a - b), abs(a - c), abs(b - c)) for a, b, c in zip(zeros, poles, shots)) if n else math.inf
    ok = n == 3 and diff < 1e-6
    report(9, ok, f"lowest m=0 levels {', '.join(f'{z:.8f}' for z in zeros)}; max pairwise gap {diff:.1e} (< 1e-6)")


def test_ac10_flat_limit(report):
    q = greens.ModelParams(50.0, 1.0)
    lv = spectrum.channel_levels(0, q, (0.0, 4.0))[:2]
    ref = oracle.flat_oscillator_levels(0, 1.0, 2)
    e0, gap = lv[0], lv[1] - lv[0]
    ok = (
        abs(e0 / q.omega - 1) < 0.01
        and abs(gap / (2 * q.omega) - 1) < 0.01
        and abs(e0 / ref[0] - 1) < 0.01
        and abs(gap / (ref[1] - ref[0]) - 1) < 0.01
    )
    report(10, ok, f"a=50: E0 = {e0:.6f} (flat solver {ref[0]:.6f}), spacing {gap:.6f} (flat solver {ref[1] - ref[0]:.6f}); 1% band")


def test_ac11_krein_structure(report):
    z = 0.9
    same = krein.perturbed_green(math.inf, z, 1.5, 0.2, 2.0, 0.4, P) == greens.green_full_H(z, 1.5, 0.2, 2.0, 0.4, P)
    window = (0.0, 7.0)
    un = spectrum.unperturbed_spectrum(P, window=window)
    branches_ok = mult_ok = True
    for chi in (-2.0, 0.5, 3.0):
        res = spectrum.perturbed_spectrum(chi, P, window, unperturbed=un)
        poles = res.diagnostics["poles"]
        for (lo, hi), cnt in res.diagnostics["branch_counts"]:
            if lo in poles and hi in poles:
                branches_ok = branches_ok and cnt == 1
        before = {round(e.z, 8): e.multiplicity for e in un.eigenvalues}
        after = {round(e.z, 8): e.multiplicity for e in res.eigenvalues}
        mult_ok = mult_ok and all(abs(after.get(k, 0) - before.get(k, 0)) <= 1 for k in set(before) | set(after))
    ok = same and branches_ok and mult_ok
    report(11, ok, f"chi=inf bit-identical: {same}; one solution per pole interval: {branches_ok}; |delta mult| <= 1: {mult_ok}")


def test_ac12_cli_determinism(report, tmp_path):
    runs = [
        ["qtrace", "--a", "1", "--omega", "1", "--z-from", "0", "--z-to", "6.5", "--n", "30"],
        ["spectrum", "--a", "1", "--omega", "1", "--chi", "0.5", "--window", "0", "6"],
    ]
    same = True
    for k, argv in enumerate(runs):
        for fmt in ("csv", "json"):
            outs = []
            for rep in range(2):
                out = tmp_path / f"r{k}_{rep}.{fmt}"
                r = subprocess.run([sys.executable, "-m", "hypdot.cli", *argv, "-o", str(out)], capture_output=True)
                same = same and r.returncode == 0
                outs.append(out.read_bytes())
            same = same and outs[0] == outs[1]
    report(12, same, "repeated qtrace and spectrum runs give byte-identical CSV and JSON")
