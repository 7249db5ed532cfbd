import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, solve_ivp
from scipy.special import ellipj, ellipk

from ars_tangency.elliptic import KAPPA, K_HALF, agm, complete_K, jacobi


def test_complete_K_zero_is_half_pi():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


def test_K_half_against_quadrature():
    val, _ = quad(lambda th: 1.0 / math.sqrt(1.0 - 0.5 * math.sin(th) ** 2), 0.0, math.pi / 2,
                  epsabs=1e-14, epsrel=1e-14)
    assert K_HALF == pytest.approx(val, abs=1e-12)
    assert K_HALF == pytest.approx(1.854074677, abs=1e-9)


@pytest.mark.parametrize("k", [0.1, 0.5, KAPPA, 0.9, 0.99, 0.999999])
def test_complete_K_matches_scipy(k):
    # scipy takes m = k^2, which loses digits as k -> 1
    assert complete_K(k) == pytest.approx(ellipk(k * k), rel=1e-12)


def test_complete_K_near_one_is_finite_and_monotone():
    big = complete_K(0.999999)
    assert math.isfinite(big) and big > complete_K(0.9)


def test_agm_of_equal_arguments():
    assert agm(2.0, 2.0) == 2.0


@pytest.mark.parametrize("k", [0.0, 0.3, KAPPA, 0.95])
def test_jacobi_at_zero(k):
    assert jacobi(0.0, k) == pytest.approx((0.0, 1.0, 1.0), abs=1e-15)


def test_quarter_and_half_period_values():
    sn, cn, dn = jacobi(K_HALF, KAPPA)
    assert (sn, cn, dn) == pytest.approx((1.0, 0.0, KAPPA), abs=1e-14)
    sn, cn, dn = jacobi(2.0 * K_HALF, KAPPA)
    assert (sn, cn, dn) == pytest.approx((0.0, -1.0, 1.0), abs=1e-14)


def test_k_zero_reduces_to_trig():
    u = np.linspace(-7.0, 7.0, 51)
    sn, cn, dn = jacobi(u, 0.0)
    np.testing.assert_allclose(sn, np.sin(u), atol=1e-15)
    np.testing.assert_allclose(cn, np.cos(u), atol=1e-15)
    np.testing.assert_allclose(dn, 1.0)


def test_matches_scipy_ellipj_on_a_grid():
    rng = np.random.default_rng(7)
    u = rng.uniform(-30.0, 30.0, 2000)
    k = rng.uniform(0.0, 0.99, 2000)
    ours = np.array(jacobi(u, k))
    ref = np.array(ellipj(u, k * k)[:3])
    assert np.max(np.abs(ours - ref)) < 1e-12


def test_derivatives_match_the_jacobi_ode():
    # sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn, integrated independently
    k = KAPPA

    def rhs(_, s):
        return [s[1] * s[2], -s[0] * s[2], -k * k * s[0] * s[1]]

    ts = np.linspace(0.0, 4.0 * K_HALF, 41)
    sol = solve_ivp(rhs, (0.0, ts[-1]), [0.0, 1.0, 1.0], t_eval=ts, rtol=1e-12, atol=1e-13, method="DOP853")
    np.testing.assert_allclose(np.array(jacobi(ts, k)), sol.y, atol=1e-10)


def test_scalar_in_scalar_out_and_broadcasting():
    sn, cn, dn = jacobi(0.3, 0.5)
    assert isinstance(sn, float)
    out = jacobi(np.zeros((3, 1)), np.array([0.1, 0.2]))
    assert out.sn.shape == (3, 2)


@pytest.mark.parametrize("k", [1.0, -0.1, 1.5, float("nan")])
def test_bad_modulus_raises(k):
    with pytest.raises(ValueError):
        complete_K(k)
    with pytest.raises(ValueError):
        jacobi(0.1, k)


def test_non_finite_argument_raises():
    with pytest.raises(ValueError):
        jacobi(float("inf"), 0.5)


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-50.0, 50.0), k=st.floats(0.0, 0.99))
def test_identities_hold(u, k):
    sn, cn, dn = jacobi(u, k)
    assert abs(sn * sn + cn * cn - 1.0) <= 1e-12
    assert abs(dn * dn + k * k * sn * sn - 1.0) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-10.0, 10.0), k=st.floats(0.0, 0.95))
def test_period_4K(u, k):
    K = complete_K(k)
    a = np.array(jacobi(u, k))
    b = np.array(jacobi(u + 4.0 * K, k))
    assert np.max(np.abs(a - b)) < 1e-11
