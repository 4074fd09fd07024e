import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superint.catalog import uniform_field_system
from superint.core import (DomainError, Field, GaugePotential, MagneticSystem, PhasePoint,
                           ScalarFunction1D as S1, covariant_momentum, curl, gauge_transform,
                           hamiltonian, hamiltonian_gradient, shift_momentum)
from superint.integrals import evaluate

from conftest import fd_gradient, instance, points


def uniform(gamma, VY=None):
    return uniform_field_system(gamma, VY or S1(), "uniform")


# --- phase points -----------------------------------------------------------

def test_phase_point_rejects_non_finite():
    with pytest.raises(ValueError):
        PhasePoint([0, np.nan, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        PhasePoint([0, 0, 0], [np.inf, 0, 0])


def test_phase_point_round_trip():
    pt = PhasePoint([1, 2, 3], [4, 5, 6])
    assert np.array_equal(PhasePoint.from_array(pt.as_array()).as_array(), pt.as_array())


# --- scalar functions --------------------------------------------------------

atoms = st.sampled_from([(2, 0, 0), (3, 0, 0), (-2, 0, 0), (-1, 0, 0), (0.5, 0, 0),
                         (1.5, 0, 0), (0, 0.7, 0), (0, -1.3, 0), (0, 0, 1), (0, 0, 2),
                         (1, 0.5, 0), (-2, 0, 1)])


@settings(max_examples=60, deadline=None)
@given(terms=st.lists(st.tuples(atoms, st.floats(-3, 3)), min_size=1, max_size=4),
       x=st.floats(0.4, 2.5), order=st.integers(1, 4))
def test_scalar_derivatives_match_finite_differences(terms, x, order):
    f = S1({k: v for k, v in terms})
    d_prev = f.derivative(order - 1)
    h = 1e-5
    fd = (d_prev(np.array([x + h]))[0] - d_prev(np.array([x - h]))[0]) / (2 * h)
    exact = f.derivative(order)(np.array([x]))[0]
    assert exact == pytest.approx(fd, rel=1e-5, abs=1e-5)


def test_singular_atoms_declare_origin():
    assert S1.power(-2).singular
    assert S1.log(1.0, 2).singular
    assert not S1.poly([1, 2, 3]).singular
    assert S1.power(0.5).needs_positive


def test_log_uses_absolute_value():
    f = S1.log()
    assert f(np.array([-2.0]))[0] == pytest.approx(np.log(2.0))


# --- covariant momentum --------------------------------------------------------

def test_covariant_momentum_zero_gauge():
    pi = covariant_momentum(PhasePoint([0, 0, 0], [1, 2, 3]), GaugePotential.zero())
    assert np.allclose(pi, [1, 2, 3])


def test_covariant_momentum_case_one():
    g = GaugePotential.case_one(S1.power(1), S1.power(1))
    pi = covariant_momentum(PhasePoint([1, 2, 0], [0, 0, 1]), g)
    assert np.allclose(pi, [0, 0, 2])


def test_covariant_momentum_case_two():
    g = GaugePotential.case_two(S1.power(1), S1.power(2))
    pi = covariant_momentum(PhasePoint([2, 0, 0], [1, 1, 1]), g)
    assert np.allclose(pi, [1, 5, -1])


def test_covariant_momentum_singular_names_coordinate():
    g = GaugePotential.case_two(S1.power(-2), S1())
    sys = MagneticSystem(g, 0)
    with pytest.raises(DomainError) as err:
        sys.check_point([0.0, 1.0, 1.0])
    assert err.value.coordinate == "x1"


# --- curl ----------------------------------------------------------------------

def test_curl_uniform_field():
    assert np.allclose(curl(uniform(2.0).gauge, [0.3, -1.0, 2.0]), [0, 2, 0])


def test_curl_of_constant_vanishes():
    g = GaugePotential([Field.const(1.0), Field.const(-2.0), Field.const(3.0)])
    assert np.allclose(curl(g, [1.0, 2.0, 3.0]), 0.0)


def test_curl_case_one():
    g = GaugePotential.case_one(S1.power(2), S1.power(3))
    assert np.allclose(curl(g, [1.0, 2.0, 0.7]), [4, 3, 0])


# --- Hamiltonian -------------------------------------------------------------------

def test_hamiltonian_free():
    assert hamiltonian(MagneticSystem.free(), PhasePoint([0, 0, 0], [1, 2, 2])) == 4.5


def test_hamiltonian_uniform_field_hand_value():
    assert hamiltonian(uniform(2.0), PhasePoint([2, 1, 1], [2, 0, 4])) == pytest.approx(2.0)


def test_hamiltonian_routes_agree_to_ulps_case1a():
    sys = instance("case1.a").system
    y = points("case1.a")
    a, b = sys.hamiltonian(y), sys.hamiltonian_gauge_form(y)
    assert np.all(np.abs(a - b) <= 8 * np.spacing(np.abs(a)))


def test_hamiltonian_routes_agree_every_entry(entry_id):
    sys = instance(entry_id).system
    y = points(entry_id)
    a, b = sys.hamiltonian(y), sys.hamiltonian_gauge_form(y)
    assert np.all(np.abs(a - b) <= 1e-12 * (1 + np.abs(a)))


def test_gradient_free():
    g = hamiltonian_gradient(MagneticSystem.free(), PhasePoint([0, 0, 0], [1, 0, 0]))
    assert np.allclose(g, [0, 0, 0, 1, 0, 0])


def test_gradient_uniform_field_hand_value():
    g = hamiltonian_gradient(uniform(1.0), PhasePoint([1, 0, 0], [0, 0, 0]))
    assert g[0] == pytest.approx(1.0)


def test_gradient_matches_finite_differences(entry_id):
    sys = instance(entry_id).system
    y = points(entry_id, 20)
    g = sys.hamiltonian_gradient(y)
    fd = fd_gradient(sys.hamiltonian, y)
    scale = 1 + np.abs(g)
    assert np.max(np.abs(g - fd) / scale) < 1e-6


def test_domain_error_at_singular_point():
    sys = instance("case1.b").system
    with pytest.raises(DomainError):
        sys.hamiltonian(np.array([[1e-4, 1.0, 0.0, 0, 0, 0]]))


def test_effective_potential_identity(entry_id):
    sys = instance(entry_id).system
    y = points(entry_id, 1000)
    A = sys.gauge(y[:, :3])
    lhs = sys.effective_potential(y[:, :3])
    rhs = sys.V(y[:, :3]) - 0.5 * np.sum(A * A, axis=1)
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * (1 + np.abs(rhs)))


def test_magnetic_field_is_curl(entry_id):
    sys = instance(entry_id).system
    x = points(entry_id, 50)[:, :3]
    assert np.allclose(sys.magnetic_field(x), curl(sys.gauge, x), rtol=1e-13, atol=1e-13)


# --- gauge transformations ---------------------------------------------------------

def test_gauge_shift_by_linear_chi():
    sys = uniform(2.0)
    new = gauge_transform(sys, Field.coord(0, 5.0))
    x = np.array([[0.3, -0.2, 0.9]])
    assert np.allclose(new.gauge(x), [[5.0, 0.0, -0.6]])
    assert np.allclose(new.magnetic_field(x), sys.magnetic_field(x))


def test_gauge_transform_keeps_W():
    sys = instance("case2.a").system
    chi = Field.monomial((1, 2, 1), 0.7) + Field.monomial((0, 0, 3), -0.2)
    new = gauge_transform(sys, chi)
    x = points("case2.a")[:, :3]
    assert np.allclose(new.effective_potential(x), sys.effective_potential(x), rtol=1e-13,
                       atol=1e-13)


def test_gauge_transform_keeps_case1a_integral():
    inst = instance("case1.a")
    new = gauge_transform(inst.system, Field.monomial((0, 2, 0)))
    X3 = inst.integral("X3").poly
    y = points("case1.a", 20)
    before = evaluate(X3, inst.system, y)
    after = evaluate(X3, new, shift_momentum(y, Field.monomial((0, 2, 0))))
    assert np.allclose(after, before, rtol=1e-12, atol=1e-12)


poly_chi = st.lists(st.tuples(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
                              st.floats(-2, 2)), min_size=1, max_size=4)


@settings(max_examples=25, deadline=None)
@given(chi_terms=poly_chi)
def test_curl_invariant_under_polynomial_gauge(chi_terms):
    sys = instance("case1.c").system
    chi = sum((Field.monomial(e, c) for e, c in chi_terms), Field())
    new = gauge_transform(sys, chi)
    x = points("case1.c", 20)[:, :3]
    for b_old, b_new in zip(sys.B, new.B):
        assert b_new.close_to(b_old, 1e-12)
    assert np.allclose(new.magnetic_field(x), sys.magnetic_field(x), rtol=1e-12, atol=1e-12)
