import cmath
import math

import numpy as np
import pytest

from hypdot import oracle, spheroidal as sph
from hypdot.errors import AccuracyError, DomainError


def idx(nu, theta, mu=0):
    return sph.SpheroidalIndex(mu, nu, theta)


def test_index_validation():
    with pytest.raises(DomainError):
        idx(0.5, -1.0)
    with pytest.raises(DomainError):
        idx(0.3, -1.0, mu=-1)
    assert idx(0.3, -1.0).reflected().nu == -1.3


def test_lambda_theta_zero():
    lam = sph.lambda_eig(idx(0.3, 0.0))
    assert abs(lam.value - 0.39) < 1e-15


def test_lambda_reflection_and_oracle():
    a = sph.lambda_eig(idx(0.3, -1.0)).value
    b = sph.lambda_eig(idx(-1.3, -1.0)).value
    assert abs(a - b) < 1e-12
    ref = oracle.tridiag_branch(0.3, -1.0)
    assert abs(a - ref) < 1e-10


def test_lambda_higher_order():
    # mu = 2: continued fraction against the shifted tridiagonal problem
    lam = sph.lambda_eig(idx(1.3, -2.0, mu=2)).value
    assert abs(sph.characteristic(2, 1.3, -2.0, lam)) < 1e-9
    assert abs(lam.imag) < 1e-12


def test_lambda_on_complex_branch_is_upper():
    # at this (nu, theta) the branch has met its neighbour; the upper member is returned
    lam = sph.lambda_eig(idx(0.45, -10.0)).value
    assert lam.imag >= 0


def test_coefficients_theta_zero():
    t = sph.coefficients(idx(0.3, 0.0), 0.39, window=10)
    expect = np.zeros(21)
    expect[10] = 1
    assert np.max(np.abs(t.values - expect)) == 0


def test_coefficient_symmetry_and_recurrence():
    lam = sph.lambda_eig(idx(0.3, -1.0))
    t = sph.coefficients(idx(0.3, -1.0), lam)
    u = sph.coefficients(idx(-1.3, -1.0), sph.lambda_eig(idx(-1.3, -1.0)))
    for r in range(-10, 11):
        assert abs(t.a(r) - u.a(-r)) < 1e-10
    assert t.recurrence_residual() < 1e-10
    miller = oracle.miller_coefficients(0.3, -1.0, lam.value, R=10)
    assert np.max(np.abs(miller - t.values[t.window - 10 : t.window + 11])) < 1e-12


def test_coefficient_window_too_small():
    lam = sph.lambda_eig(idx(0.3, -16.0))
    with pytest.raises(AccuracyError):
        sph.coefficients(idx(0.3, -16.0), lam, window=8)


def test_tail_law_theta_minus_four():
    i = idx(0.3, -4.0)
    t = sph.coefficients(i, sph.lambda_eig(i))
    ratio = 900 * t.a(30) / t.a(29)
    assert abs(ratio / -1.0 - 1) < 0.01


def test_s_factor():
    assert sph.s_factor(sph.coefficients(idx(0.3, 0.0), 0.39, 10)) == 1
    i = idx(0.3, -1.0)
    lam = sph.lambda_eig(i).value
    t = sph.coefficients(i, lam)
    s = sph.s_factor(t)
    alt = sum((-1) ** (r % 2) * t.a(r) for r in range(-t.window, t.window + 1))
    assert abs(s * alt - 1) < 1e-12
    m = oracle.miller_coefficients(0.3, -1.0, lam, R=40)
    alt_o = sum((-1) ** (k % 2) * m[k + 40] for k in range(-40, 41))
    assert abs(s - 1 / alt_o) < 1e-12


def test_nu_from_lambda():
    assert abs(sph.nu_from_lambda(0, 0.0, 2.0) - 1) < 1e-12
    lam = sph.lambda_eig(idx(0.3, -1.0)).value
    assert abs(sph.nu_from_lambda(0, -1.0, lam) - 0.3) < 1e-9
    nu = sph.nu_from_lambda(0, -1.0, 5.0)
    back = sph.lambda_eig(idx(nu, -1.0)).value
    assert abs(back - 5.0) < 1e-9
    assert nu.real >= -0.5


def test_nu_from_lambda_monodromy():
    for m, lam in ((0, 2.7), (1, -0.3), (0, -3.35)):
        nu = sph.nu_from_lambda(m, -1.0, lam, labeled=False)
        tr = oracle.monodromy_trace(m, -1.0, lam)
        assert abs(tr - cmath.cos(2 * math.pi * nu)) < 1e-9 * (1 + abs(tr))


def test_psi_s():
    t = sph.coefficients(idx(0.3, 0.0), 0.39, 10)
    from hypdot.specfun import digamma

    assert abs(sph.psi_s(t) - digamma(1.3)) < 1e-14
    i = idx(0.3, -1.0)
    lam = sph.lambda_eig(i)
    t1 = sph.coefficients(i, lam, 30)
    t2 = sph.coefficients(i, lam, 60)
    assert abs(sph.psi_s(t1) - sph.psi_s(t2)) < 1e-10
    m = oracle.miller_coefficients(0.3, -1.0, lam.value, R=30)
    direct = sum((-1) ** (r % 2) * m[r + 30] * digamma(1.3 + 2 * r) for r in range(-30, 31))
    assert abs(sph.psi_s(t1) - direct) < 1e-10


def test_radial_s3_asymptotics():
    i = idx(0.3, -1.0)
    t = sph.coefficients(i, sph.lambda_eig(i))
    xi = 50.0
    r = cmath.sqrt(-1.0)
    lead = 0.5 / r / xi * cmath.exp(1j * (2 * r * xi - 0.3 * math.pi / 2 - math.pi / 2))
    assert abs(sph.radial_S(3, t, xi) / lead - 1) < 0.05


def test_angular_at_one():
    i = idx(0.3, -1.0)
    t = sph.coefficients(i, sph.lambda_eig(i))
    assert abs(sph.angular_Ps(t, 1 + 1e-12) - 1 / sph.s_factor(t)) < 1e-9


def test_radial_domain():
    i = idx(0.3, -1.0)
    t = sph.coefficients(i, sph.lambda_eig(i))
    with pytest.raises(DomainError):
        sph.radial_S(3, t, 1.0)


@pytest.mark.parametrize("xi", [1.2, 2.0, 4.0])
def test_angular_ode_residual(xi):
    i = idx(0.3, -1.0)
    lam = sph.lambda_eig(i).value
    t = sph.coefficients(i, lam)
    assert sph.spheroidal_residual(i, lam, lambda x: sph.angular_Ps(t, x), xi) < 1e-7
