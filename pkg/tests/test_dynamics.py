import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from superradiance.core import InvariantError, SystemParams, basis_state, build_liouvillian, check_density, vectorize
from superradiance.dynamics import (
    NonUniqueSteadyStateWarning,
    decompose,
    evolve_vector,
    null_space_dimension,
    propagate,
    regression_evolve,
    steady_state,
)
from superradiance.oracle import brute_force_steady_state

from .strategies import density_matrices, system_params


def test_generic_generator_is_diagonalised():
    d = decompose(build_liouvillian(SystemParams(gamma_d=1.0, beta=0.8, delta=1.0)))
    assert d.mode == "spectral"
    assert not d.uses_fallback
    np.testing.assert_allclose(d.reconstruct(), d.generator, atol=1e-10)


def test_ideal_dicke_generator_is_defective_and_falls_back():
    d = decompose(build_liouvillian(SystemParams(beta=1.0)))
    assert d.mode == "expm" and d.uses_fallback
    t = np.linspace(0, 5, 11)
    states = propagate(d, basis_state("e1e2"), t)
    # exact exp(L t) from scipy
    for ti, rho in zip(t, states):
        ref = scipy.linalg.expm(d.generator * ti) @ vectorize(basis_state("e1e2"))
        np.testing.assert_allclose(vectorize(rho), ref, atol=1e-10)


def test_growing_mode_rejected():
    with pytest.raises(InvariantError):
        decompose(np.diag([0.0] * 15 + [1.0]).astype(complex))


@given(system_params(), density_matrices(), st.floats(0.0, 10.0))
def test_propagation_keeps_density_operators(params, rho0, t):
    rho = propagate(decompose(build_liouvillian(params)), rho0, [t])[0]
    check_density(rho, herm_tol=1e-10, trace_tol=1e-9, psd_tol=1e-9)


@given(system_params(), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_semigroup(params, t, s):
    d = decompose(build_liouvillian(params))
    vec0 = vectorize(basis_state("e1g2"))
    direct = evolve_vector(d, vec0, [t + s])[0]
    stepped = evolve_vector(d, evolve_vector(d, vec0, [t])[0], [s])[0]
    np.testing.assert_allclose(direct, stepped, atol=1e-10)


@given(system_params())
def test_matches_scipy_expm(params):
    liouv = build_liouvillian(params)
    vec0 = vectorize(basis_state("e1g2"))
    got = evolve_vector(decompose(liouv), vec0, [1.7])[0]
    np.testing.assert_allclose(got, scipy.linalg.expm(1.7 * liouv) @ vec0, atol=1e-10)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        propagate(decompose(build_liouvillian(SystemParams())), basis_state("e1g2"), [-1.0])


def test_regression_evolve_is_linear():
    d = decompose(build_liouvillian(SystemParams(gamma_d=1.0, delta=2.0)))
    a = basis_state("e1g2")
    b = basis_state("g1e2")
    lhs = regression_evolve(d, a + 2j * b, [0.8])[0]
    rhs = regression_evolve(d, a, [0.8])[0] + 2j * regression_evolve(d, b, [0.8])[0]
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_unpumped_steady_state_not_unique():
    liouv = build_liouvillian(SystemParams(beta=1.0))
    assert null_space_dimension(liouv) > 1  # dark state is stationary too
    with pytest.warns(NonUniqueSteadyStateWarning):
        rho = steady_state(liouv)
    np.testing.assert_allclose(rho, basis_state("g1g2"))


@given(system_params(pumped=True))
def test_pumped_steady_state(params):
    liouv = build_liouvillian(params, with_pump=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rho = steady_state(liouv)
    check_density(rho)
    np.testing.assert_allclose(liouv @ vectorize(rho), 0, atol=1e-10)
    np.testing.assert_allclose(rho, brute_force_steady_state(params), atol=1e-8)
