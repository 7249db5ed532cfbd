import math

import numpy as np
import pytest

from ars_tangency import closedform as cf
from ars_tangency import models as md
from ars_tangency.elliptic import K_HALF
from ars_tangency.flow import integrate, shoot


def test_origin_at_time_zero():
    assert cf.nilpotent_geodesic(cf.NilpotentGeodesicParams(1.0, 1.0), 0.0) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_return_to_axis_at_2K():
    y, z = cf.nilpotent_geodesic(cf.NilpotentGeodesicParams(1.0, 1.0), 2 * K_HALF)
    assert y == pytest.approx(0.0, abs=1e-14)
    assert z == pytest.approx(1.2360498, abs=1e-7)


def test_pair_is_mirror_symmetric():
    t = np.linspace(0.0, 6.0, 41)
    y1, z1 = cf.nilpotent_geodesic(cf.NilpotentGeodesicParams(1.0, 1.0), t)
    y2, z2 = cf.nilpotent_geodesic(cf.NilpotentGeodesicParams(-1.0, 1.0), t)
    np.testing.assert_allclose(y1, -y2, atol=1e-15)
    np.testing.assert_allclose(z1, z2, atol=1e-15)


def test_bad_py_rejected():
    with pytest.raises(ValueError):
        cf.NilpotentGeodesicParams(0.3, 1.0)


@pytest.mark.parametrize("lam", [-4.0, -0.5, 0.0, 0.25, 1.0, 9.0])
def test_closed_form_matches_integration(lam):
    p = cf.NilpotentGeodesicParams(1.0, lam)
    t_end = 3.0 if lam == 0.0 else 4 * K_HALF / math.sqrt(abs(lam))
    traj = shoot(md.nilpotent(), 1.0, lam, t_end, 1e-12)
    y, z, p_y, p_z = cf.nilpotent_state(p, traj.times)
    np.testing.assert_allclose(np.column_stack([y, z, p_y, p_z]), traj.states, atol=1e-9)


def test_closed_form_solves_the_ode():
    p = cf.NilpotentGeodesicParams(-1.0, 2.0)
    t = np.linspace(0.1, 3.0, 30)
    h = 1e-5
    y, z, p_y, p_z = cf.nilpotent_state(p, t)
    yp, zp, _, _ = cf.nilpotent_state(p, t + h)
    ym, zm, _, _ = cf.nilpotent_state(p, t - h)
    np.testing.assert_allclose((yp - ym) / (2 * h), p_y, atol=1e-8)
    np.testing.assert_allclose((zp - zm) / (2 * h), p_z * y ** 4 / 4, atol=1e-8)


def test_cut_times():
    assert cf.nilpotent_cut_time(1.0) == pytest.approx(3.7081494, abs=1e-7)
    assert cf.nilpotent_cut_time(4.0) == pytest.approx(K_HALF, rel=1e-15)
    assert cf.nilpotent_cut_time(-4.0) == pytest.approx(K_HALF, rel=1e-15)
    assert cf.nilpotent_cut_time(0.0) is None


def test_conjugate_coefficient_and_its_parametric_points():
    alpha = cf.nilpotent_conjugate_coefficient()
    assert alpha == pytest.approx(0.6555143885730, abs=1e-12)
    for lam in (1.0, 4.0):
        eta = 1 / math.sqrt(lam)
        y, z = cf.nilpotent_geodesic(cf.NilpotentGeodesicParams(1.0, lam), 3 * K_HALF * eta)
        assert (y, z) == pytest.approx((-math.sqrt(2) * eta, K_HALF * eta ** 3), abs=1e-13)
        assert z == pytest.approx(alpha * abs(y) ** 3, rel=1e-13)


def test_grushin_cut_pair():
    for p_x0 in (1.0, -1.0):
        x, y = cf.grushin_geodesic(p_x0, 1.0, math.pi)
        assert (x, y) == pytest.approx((0.0, math.pi / 2), abs=1e-15)
    assert cf.heisenberg_z(1.0, 1.0, math.pi) == pytest.approx(2.0)
    assert cf.grushin_cut_time(2.0) == pytest.approx(math.pi / 2)


def test_grushin_small_time():
    t = 1e-3
    x, y = cf.grushin_geodesic(-1.0, 1.0, t)
    assert x == pytest.approx(-t, abs=1e-9)
    assert abs(y) < 1e-9


@pytest.mark.parametrize("p_x0,p_y", [(1.0, 1.0), (-1.0, 2.5), (1.0, 0.0)])
def test_grushin_and_heisenberg_against_integration(p_x0, p_y):
    t = np.linspace(0.0, 4.0, 9)
    traj = integrate(md.heisenberg_rhs, np.array([0.0, 0.0, 0.0, p_x0, p_y, 0.0]), 4.0, 1e-12)
    x, y = cf.grushin_geodesic(p_x0, p_y, t)
    num = traj(t)
    np.testing.assert_allclose(num[:, 0], x, atol=1e-10)
    np.testing.assert_allclose(num[:, 1], y, atol=1e-10)
    np.testing.assert_allclose(num[:, 2], cf.heisenberg_z(p_x0, p_y, t), atol=1e-10)


def test_tan_roots():
    assert cf.tan_fixed_point(1) == pytest.approx(4.493409457909064, abs=1e-13)
    assert cf.tan_fixed_point(2) == pytest.approx(7.725251836937707, abs=1e-13)
    assert cf.grushin_conjugate_time(2.0) == pytest.approx(4.493409457909064 / 2)
    assert cf.heisenberg_tan_conjugate_time(1.0) == pytest.approx(8.986818915818128, abs=1e-12)
