import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ars_tangency import models as md


def fd_jacobian(fun, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.column_stack(cols)


def fd_gradient(fun, x, h=1e-6):
    return fd_jacobian(lambda v: np.atleast_1d(fun(v)), x, h)[0]


@pytest.mark.parametrize("m,yz,expected", [
    (md.nilpotent(), (2.0, 5.0), 2.0),
    (md.order0(1.0, 0.0), (0.0, 3.0), 3.0),
    (md.order0(1.0, 1.0), (1.0, 1.0), 2.5),
])
def test_f1_coefficient_examples(m, yz, expected):
    assert md.f1_coefficient(m, *yz) == pytest.approx(expected)


def test_higher_terms_enter_f():
    m = md.ArsModel(1.0, 0.0, ((4, 0, 2.0), (1, 1, -1.0)))
    y, z = 0.7, -0.2
    assert md.f1_coefficient(m, y, z) == pytest.approx(z + y * y / 2 + 2 * y ** 4 - y * z)


def test_low_weight_monomial_rejected():
    with pytest.raises(ValueError):
        md.ArsModel(1.0, 0.0, ((3, 0, 1.0),))
    with pytest.raises(ValueError):
        md.ArsModel(1.0, 0.0, ((1.5, 1, 1.0),))


@pytest.mark.parametrize("data,expected", [
    ((1, 0, 0, 0), (1, 0)),
    ((1, 2, 0, 0), (1, 1)),
    ((2, 0, math.log(2), 1), (2, 0.5)),
])
def test_normal_form_to_model(data, expected):
    assert md.normal_form_to_model(*data) == pytest.approx(expected)


def test_normal_form_needs_positive_psi():
    with pytest.raises(ValueError):
        md.normal_form_to_model(0.0, 1.0, 0.0, 0.0)


def test_model_json_round_trip(tmp_path):
    m = md.ArsModel(2.0, -0.5, ((0, 2, 0.3), (5, 0, 1.0)), "custom")
    path = tmp_path / "m.json"
    m.save(path)
    assert set(json.loads(path.read_text())) == {"name", "epsilon", "epsilon_prime", "higher_terms"}
    assert md.ArsModel.load(path) == m


def test_hamiltonian_examples():
    nil = md.nilpotent()
    assert md.ars_hamiltonian(nil, (0, 0, 1, 3.0)) == pytest.approx(0.5)
    y, pz = 1.3, 2.0
    assert md.ars_hamiltonian(nil, (y, 0, 0, pz)) == pytest.approx(pz ** 2 * y ** 4 / 8)
    assert md.ars_hamiltonian(md.order0(1.0, 0.0), (0, 1, 0, 1)) == pytest.approx(0.5)


def test_rhs_examples():
    nil = md.nilpotent()
    np.testing.assert_allclose(md.ars_rhs(nil, (0, 0, 1, 1)), [1, 0, 0, 0])
    np.testing.assert_allclose(md.ars_rhs(nil, (1, 0, 0, 2)), [0, 0.5, -2, 0])


MODELS = [md.nilpotent(), md.order0(1.0, 0.0), md.order0(-2.0, 1.5),
          md.ArsModel(1.0, 1.0, ((4, 0, 0.5), (1, 1, -0.7), (0, 2, 0.2)))]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4), st.sampled_from(range(len(MODELS))))
def test_rhs_is_the_hamiltonian_vector_field(s, which):
    m = MODELS[which]
    s = np.array(s)
    grad = fd_gradient(lambda v: md.ars_hamiltonian(m, v), s)
    rhs = md.ars_rhs(m, s)
    np.testing.assert_allclose(rhs, [grad[2], grad[3], -grad[0], -grad[1]], atol=1e-6)
    assert abs(grad @ rhs) < 1e-6


@pytest.mark.parametrize("m", MODELS)
def test_ars_jacobian_against_finite_differences(m):
    rng = np.random.default_rng(3)
    for s in rng.uniform(-1.0, 1.0, (5, 4)):
        np.testing.assert_allclose(md.ars_jacobian(m, s), fd_jacobian(lambda v: md.ars_rhs(m, v), s), atol=1e-6)


def test_aux_jacobians_against_finite_differences():
    rng = np.random.default_rng(4)
    for s in rng.uniform(-1.0, 1.0, (5, 4)):
        np.testing.assert_allclose(md.grushin_jacobian(s), fd_jacobian(md.grushin_rhs, s), atol=1e-7)
    for s in rng.uniform(-1.0, 1.0, (5, 6)):
        np.testing.assert_allclose(md.heisenberg_jacobian(s), fd_jacobian(md.heisenberg_rhs, s), atol=1e-7)


def test_lifted_flow_reduces_on_px_zero_slice():
    m = md.order0(1.0, 0.4)
    rng = np.random.default_rng(5)
    for y, z, py, pz in rng.uniform(-1.0, 1.0, (5, 4)):
        lifted = md.lifted_rhs_order0(m, (0.3, y, z, 0.0, py, pz))
        np.testing.assert_allclose(lifted[[1, 2, 4, 5]], md.ars_rhs(m, (y, z, py, pz)), atol=1e-14)


def test_lifted_rhs_at_origin():
    lam = 2.5
    np.testing.assert_allclose(md.lifted_rhs_order0(md.nilpotent(), (0, 0, 0, 0, 1, lam)), [0, 1, 0, 0, 0, 0])


def test_martinet_surface_is_invariant():
    d = md.lifted_rhs_order0(md.nilpotent(), (0.4, 0.0, 0.2, 0.7, 0.0, 1.3))
    assert d[1] == 0.0 and d[4] == 0.0


def test_grushin_rhs_at_origin():
    d = md.grushin_rhs((0, 0, 1, 2.0))
    assert d[0] == 1.0 and d[1] == 0.0


@pytest.mark.parametrize("eps,epp,y,z", [(1, 0, 0, 0), (1, 0, 1, -0.5), (2, 1, 1, -0.75)])
def test_singular_set_examples(eps, epp, y, z):
    assert md.singular_set_z(md.order0(eps, epp), y) == pytest.approx(z)


def test_singular_set_with_higher_terms_is_a_root():
    m = md.ArsModel(1.0, 0.5, ((0, 2, 0.3), (4, 0, 1.0)))
    z = md.singular_set_z(m, 0.6)
    assert abs(md.f1_coefficient(m, 0.6, z)) < 1e-14


def test_singular_set_undefined_without_epsilon():
    assert md.singular_set_z(md.nilpotent(), 0.5) is None
