import math

import numpy as np
import pytest

from hypdot import greens, oracle, spheroidal as sph

P = greens.ModelParams(1.0, 1.0)


def test_tridiag_theta_zero():
    lam = oracle.tridiag_branch(0.3, 0.0)
    assert abs(lam - 0.39) < 1e-12


@pytest.mark.parametrize("nu,theta", [(0.3, -0.5), (1.7, -3.0), (-0.25, -8.0)])
def test_tridiag_matches_continued_fraction(nu, theta):
    ref = oracle.tridiag_branch(nu, theta)
    lam = sph.lambda_eig(sph.SpheroidalIndex(0, nu, theta)).value
    assert abs(lam - ref) < 1e-10


def test_miller_normalized():
    lam = sph.lambda_eig(sph.SpheroidalIndex(0, 0.3, -1.0)).value
    m = oracle.miller_coefficients(0.3, -1.0, lam, R=20)
    assert m.shape == (41,)
    assert m[20] == 1


def test_monodromy_trace_theta_zero():
    # at theta = 0 the monodromy of the Legendre equation has trace 2 cos(2 pi nu)
    nu = 0.3
    tr = oracle.monodromy_trace(0, 0.0, nu * (nu + 1))
    assert abs(tr - math.cos(2 * math.pi * nu)) < 1e-9


@pytest.mark.parametrize("m", [0, 2])
def test_frobenius_patch_independent_of_radius(m):
    # switching from the series to the integrator earlier or later gives the same solution
    a = oracle.regular_solution(m, 2.0, P, 1.6, oracle.ShootingConfig(series_radius=0.1))
    b = oracle.regular_solution(m, 2.0, P, 1.6, oracle.ShootingConfig(series_radius=0.03))
    assert np.allclose(a, b, rtol=1e-8)


def test_shooting_levels_are_real_roots():
    z = oracle.shoot_eigen(0, P, (0.0, 7.0))
    assert len(z) == 2
    for zt in z:
        assert abs(oracle.shooting_mismatch(0, zt, P)) < 1e-6 * abs(oracle.shooting_mismatch(0, zt + 0.1, P))


def test_flat_oscillator_levels():
    # 2d isotropic oscillator: omega (2n + |m| + 1)
    for m in (0, 1, 3):
        lv = oracle.flat_oscillator_levels(m, 1.0, 3)
        for n, e in enumerate(lv):
            assert abs(e - (2 * n + m + 1)) < 1e-6
