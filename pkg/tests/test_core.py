import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superradiance import core
from superradiance.core import (
    HBAR_UEV_NS,
    N1,
    N2,
    SIGMA1_MINUS,
    SIGMA2_MINUS,
    InvariantError,
    SystemParams,
    basis_state,
    build_liouvillian,
    check_density,
    devectorize,
    vectorize,
)
from superradiance.oracle import brute_force_generator

from .strategies import density_matrices, system_params


def test_basis_order_and_lowering_operators():
    assert core.BASIS_LABELS == ("g1g2", "g1e2", "e1g2", "e1e2")
    e1g2 = np.zeros(4)
    e1g2[2] = 1
    g1g2 = np.zeros(4)
    g1g2[0] = 1
    np.testing.assert_array_equal(SIGMA1_MINUS @ e1g2, g1g2)
    np.testing.assert_array_equal(SIGMA2_MINUS @ e1g2, np.zeros(4))
    np.testing.assert_array_equal(np.diag(N1).real, [0, 0, 1, 1])
    np.testing.assert_array_equal(np.diag(N2).real, [0, 1, 0, 1])


def test_detuning_conversion():
    assert core.detuning_to_angular(HBAR_UEV_NS) == pytest.approx(1.0)
    # 1.1 ueV beats with a period of 2 pi hbar / delta
    assert 2 * math.pi / core.detuning_to_angular(1.1) == pytest.approx(3.7597, abs=1e-4)


def test_hamiltonian_splits_symmetrically():
    h = core.build_hamiltonian(2.0)
    w = core.detuning_to_angular(2.0)
    np.testing.assert_allclose(np.diag(h).real, [0, -w / 2, w / 2, 0])


@pytest.mark.parametrize(
    "kwargs",
    [{"gamma1": -1.0}, {"gamma_d": math.nan}, {"beta": 1.5}, {"beta": -0.1}, {"delta": math.inf}, {"gamma_p": -0.01}],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_params_replace_and_rate():
    p = SystemParams(gamma1=1.0, gamma2=2.0, gamma_d=8.0)
    q = p.replace(delta=3.3)
    assert q.delta == 3.3 and p.delta == 0.0
    assert p.max_rate == pytest.approx(8.0)
    assert q.as_dict()["gamma2"] == 2.0


@given(density_matrices())
def test_vectorize_round_trip(rho):
    np.testing.assert_array_equal(devectorize(vectorize(rho)), rho)


def test_vectorization_identity(rng):
    a, b, rho = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
    np.testing.assert_allclose(np.kron(b.T, a) @ vectorize(rho), vectorize(a @ rho @ b), atol=1e-12)


def test_devectorize_warns_on_non_hermitian():
    with pytest.warns(RuntimeWarning):
        devectorize(np.arange(16, dtype=complex))


@given(system_params(pumped=True), st.booleans())
def test_liouvillian_is_trace_preserving(params, with_pump):
    liouv = build_liouvillian(params, with_pump=with_pump)
    np.testing.assert_allclose(core.trace_functional() @ liouv, 0, atol=1e-12)


@given(system_params(pumped=True), density_matrices())
def test_liouvillian_preserves_hermiticity(params, rho):
    out = devectorize(build_liouvillian(params, with_pump=True) @ vectorize(rho), check=False)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


@given(system_params(pumped=True), st.booleans())
def test_liouvillian_matches_operator_form(params, with_pump):
    np.testing.assert_allclose(build_liouvillian(params, with_pump), brute_force_generator(params, with_pump), atol=1e-12)


def test_dissipator_sign_convention():
    # D[s-] drains the excited population at unit rate
    d = core.dissipator(np.array([[0, 1], [0, 0]], dtype=complex))
    rho_e = np.array([[0, 0], [0, 1]], dtype=complex)
    drho = (d @ rho_e.reshape(-1, order="F")).reshape(2, 2, order="F")
    np.testing.assert_allclose(drho, [[1, 0], [0, -1]])


def test_collective_operator():
    s = core.collective_operator(4.0, 1.0)
    np.testing.assert_allclose(s, 2 * SIGMA1_MINUS + SIGMA2_MINUS)
    with pytest.raises(ValueError):
        core.collective_operator(-1.0, 1.0)


def test_pump_is_optional():
    p = SystemParams(gamma_p=0.3)
    assert len(core.jump_operators(p, with_pump=True)) == len(core.jump_operators(p)) + 2


def test_check_density():
    check_density(basis_state("e1g2"))
    with pytest.raises(InvariantError, match="trace"):
        check_density(2 * basis_state("e1g2"))
    with pytest.raises(InvariantError, match="Hermitian"):
        bad = basis_state("e1g2").copy()
        bad[0, 1] = 0.5
        check_density(bad)
    with pytest.raises(InvariantError, match="positive"):
        check_density(np.diag([1.5, -0.5, 0, 0]).astype(complex))


def test_basis_state_unknown_label():
    with pytest.raises(ValueError):
        basis_state("e1x2")
