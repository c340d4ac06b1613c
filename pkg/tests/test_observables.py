import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superradiance import oracle
from superradiance.core import SystemParams, basis_state, ket_to_density
from superradiance.observables import (
    TimeSeries,
    g2_components,
    g2_trace,
    intensity_trace,
    mirror,
    photon_budget,
    raw_intensity,
)

from .strategies import density_matrices, system_params


def test_timeseries_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, 0.0, 1.0]), np.ones(3))
    with pytest.raises(ValueError):
        TimeSeries(np.arange(3.0), np.array([1.0, math.nan, 1.0]))
    with pytest.raises(ValueError):
        TimeSeries(np.arange(3.0), np.array([1.0, -0.5, 1.0]), "intensity")
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, 1.0, 3.0]), np.ones(3)).step


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.5])
def test_ideal_pair_decays_at_twice_the_rate(gamma):
    t = np.linspace(0, 5 / gamma, 401)
    trace = intensity_trace(SystemParams(gamma1=gamma, gamma2=gamma, beta=1.0), times=t)
    np.testing.assert_allclose(trace.values, np.exp(-2 * gamma * t), atol=1e-8)


@given(st.floats(0.2, 3.0), st.floats(0.0, 1.0))
def test_resonant_pair_closed_form(gamma, beta):
    t = np.linspace(0, 4 / gamma, 81)
    trace = intensity_trace(SystemParams(gamma1=gamma, gamma2=gamma, beta=beta), times=t)
    np.testing.assert_allclose(trace.values, oracle.analytic_dicke_pair(gamma, beta, t), atol=1e-9)


def test_intensity_trace_starts_at_one():
    trace = intensity_trace(SystemParams(gamma_d=8.0, beta=0.8, delta=1.1), times=np.linspace(0, 3, 31))
    assert trace.values[0] == pytest.approx(1.0, abs=1e-12)
    assert trace.normalization["divided_by"] == "I(0)"


def test_dark_initial_state_rejected():
    with pytest.raises(ValueError, match="zero"):
        intensity_trace(SystemParams(), basis_state("g1g2"), np.linspace(0, 1, 3))


def test_raw_intensity_never_negative():
    values = raw_intensity(SystemParams(gamma_d=3.0, delta=4.0, beta=0.9), basis_state("e1g2"), np.linspace(0, 60, 301))
    assert np.all(values >= 0)


def test_g2_needs_pumping():
    with pytest.raises(ValueError, match="gamma_p"):
        g2_components(SystemParams(), [0.0])


@given(system_params(pumped=True))
def test_g2_tends_to_one(params):
    # the slowest relaxation is never slower than the pump rate
    tau = 50.0 / params.gamma_p
    assert g2_trace(params, [tau]).values[0] == pytest.approx(1.0, abs=1e-6)


@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.01, 1.0), st.floats(0.0, 5.0), st.floats(-5, 5))
def test_independent_emitters_zero_delay(g1, g2, gp, gd, delta):
    # no collective channel: the stationary state is a product state
    params = SystemParams(gamma1=g1, gamma2=g2, gamma_p=gp, gamma_d=gd, beta=0.0, delta=delta)
    p1, p2 = oracle.pumped_population(gp, g1), oracle.pumped_population(gp, g2)
    assert g2_trace(params, [0.0]).values[0] == pytest.approx(oracle.independent_g2_zero_instantaneous(g1, g2, p1, p2), abs=1e-10)


def test_strong_dephasing_destroys_cross_correlation():
    # coherences vanish: g2(0) approaches the instantaneous uncorrelated value 1
    value = g2_trace(SystemParams(gamma_d=1000.0, beta=0.8, gamma_p=0.01), [0.0]).values[0]
    assert value == pytest.approx(1.0009471151776568, abs=1e-9)
    assert abs(value - 1.0) < 2e-3


def test_far_detuned_zero_delay_frozen():
    p = SystemParams(beta=0.8, gamma_p=0.01, delta=1000.0, gamma_d=0.05)
    assert g2_trace(p, [0.0]).values[0] == pytest.approx(1.0000004349895353, abs=1e-10)


def test_resonant_anti_dip_without_wandering_frozen():
    values = g2_trace(SystemParams(beta=0.8, gamma_p=0.01, gamma_d=8.0), [0.0, 1.0]).values
    np.testing.assert_allclose(values, [1.11703896, 0.78816367], atol=1e-8)


def test_mirror_is_even():
    trace = g2_trace(SystemParams(beta=0.8, gamma_p=0.05, gamma_d=1.0, delta=2.0), np.linspace(0, 4, 41))
    full = mirror(trace)
    assert len(full) == 81
    np.testing.assert_array_equal(full.values, full.values[::-1])
    np.testing.assert_array_equal(full.times, -full.times[::-1])


@given(system_params(), density_matrices())
def test_photon_budget_closes(params, rho0):
    budget = photon_budget(params, rho0, horizon=30.0)
    assert abs(budget.imbalance) < 1e-6
    for part in (budget.waveguide, budget.leaked, budget.nonradiative, budget.remaining):
        assert part >= -1e-12


def test_photon_budget_doubly_excited():
    budget = photon_budget(SystemParams(beta=0.8, gamma_nr=0.2), basis_state("e1e2"), horizon=200.0)
    assert budget.initial == pytest.approx(2.0)
    assert budget.total == pytest.approx(2.0, abs=1e-8)
    assert budget.remaining < 1e-8


def test_photon_budget_ideal_dicke_traps_dark_half():
    budget = photon_budget(SystemParams(beta=1.0), basis_state("e1g2"), horizon=50.0)
    assert budget.waveguide == pytest.approx(0.5, abs=1e-9)
    assert budget.remaining == pytest.approx(0.5, abs=1e-9)


def test_photon_budget_with_pump_balances():
    bright = np.zeros(4, dtype=complex)
    bright[1] = bright[2] = 1 / math.sqrt(2)
    budget = photon_budget(SystemParams(beta=0.7, gamma_p=0.1, gamma_d=0.5), ket_to_density(bright), 20.0, with_pump=True)
    assert budget.pumped > 0
    assert abs(budget.imbalance) < 1e-6


def test_photon_budget_horizon():
    with pytest.raises(ValueError):
        photon_budget(SystemParams(), basis_state("e1g2"), 0.0)
