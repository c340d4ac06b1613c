"""Oracle cross-checks of the main solver path, shared by ``oracle-check`` and the tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import oracle
from .core import SIGMA1_MINUS, N1, N2, SystemParams, build_liouvillian, expectation, ket_to_density
from .dynamics import decompose, propagate
from .ensemble import convolve_detector
from .observables import g2_trace, intensity_trace, photon_budget

STATE_TOL = 1e-6
G2_TOL = 1e-6
BUDGET_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    error: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


def random_params(rng: np.random.Generator, pumped: bool = False) -> SystemParams:
    return SystemParams(
        gamma1=float(rng.uniform(0.3, 2.0)),
        gamma2=float(rng.uniform(0.3, 2.0)),
        gamma_d=float(rng.uniform(0.0, 3.0)),
        gamma_p=float(rng.uniform(0.01, 0.5)) if pumped else 0.0,
        beta=float(rng.uniform(0.0, 1.0)),
        delta=float(rng.uniform(-5.0, 5.0)),
        gamma_nr=float(rng.uniform(0.0, 0.5)),
    )


def random_state(rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def check_dicke(gamma: float = 1.0) -> float:
    params = SystemParams(gamma1=gamma, gamma2=gamma, beta=1.0)
    t = np.linspace(0.0, 5.0 / gamma, 501)
    return float(np.max(np.abs(intensity_trace(params, times=t).values - oracle.analytic_dicke_pair(gamma, 1.0, t))))


def check_bright_dark(gamma: float = 1.0, beta: float = 0.8) -> float:
    params = SystemParams(gamma1=gamma, gamma2=gamma, beta=beta)
    decomp = decompose(build_liouvillian(params))
    t = np.linspace(0.0, 5.0 / gamma, 201)
    rb, rd = oracle.dicke_pair_rates(gamma, beta)
    err = 0.0
    for sign, rate in ((1.0, rb), (-1.0, rd)):
        ket = np.zeros(4, dtype=complex)
        ket[2], ket[1] = 1 / math.sqrt(2), sign / math.sqrt(2)
        states = propagate(decomp, ket_to_density(ket), t)
        pop = np.array([expectation(N1 + N2, r).real for r in states])
        err = max(err, float(np.max(np.abs(pop - np.exp(-rate * t)))))
    return err


def check_single_emitter(gamma: float = 1.3, gamma_d: float = 0.7) -> float:
    params = SystemParams(gamma1=gamma, gamma2=0.0, gamma_d=gamma_d, beta=0.6)
    ket = np.zeros(4, dtype=complex)
    ket[0] = ket[2] = 1 / math.sqrt(2)
    t = np.linspace(0.0, 4.0, 201)
    states = propagate(decompose(build_liouvillian(params)), ket_to_density(ket), t)
    pe, coh = oracle.analytic_single_emitter(gamma, gamma_d, t, pe0=0.5, coh0=0.5)
    err_p = np.max(np.abs(states[:, 2, 2].real - pe))
    err_c = np.max(np.abs(np.array([expectation(SIGMA1_MINUS, r) for r in states]) - coh))
    return float(max(err_p, err_c))


def check_pumped_populations(gamma1=0.9, gamma2=1.4, gamma_p=0.2, gamma_nr=0.1) -> float:
    from .dynamics import steady_state

    # beta = 0: no collective channel, so each emitter is an independent pumped two-level system
    params = SystemParams(gamma1=gamma1, gamma2=gamma2, gamma_p=gamma_p, beta=0.0, gamma_d=0.5, delta=1.0, gamma_nr=gamma_nr)
    rho = steady_state(build_liouvillian(params, with_pump=True))
    p1 = expectation(N1, rho).real
    p2 = expectation(N2, rho).real
    return float(max(abs(p1 - oracle.pumped_population(gamma_p, gamma1, gamma_nr)), abs(p2 - oracle.pumped_population(gamma_p, gamma2, gamma_nr))))


def check_euler_states(params: SystemParams, rho0: np.ndarray, t_end: float = 2.0) -> float:
    exact = propagate(decompose(build_liouvillian(params)), rho0, [t_end])[0]
    ref = oracle.euler_propagate(params, rho0, t_end, oracle.max_step(params), extrapolate=True)
    return float(np.max(np.abs(exact - ref)))


def check_brute_g2(params: SystemParams, taus=None) -> float:
    if taus is None:
        taus = np.linspace(0.0, 2.0, 9)
    main = g2_trace(params, taus).values
    ref = oracle.brute_force_g2(params, taus)
    return float(np.max(np.abs(main - ref)))


def check_budget(params: SystemParams, rho0: np.ndarray, horizon: float = 40.0) -> float:
    return abs(photon_budget(params, rho0, horizon).imbalance)


def check_independent_limit(delta: float = 1000.0, gamma: float = 1.0, gamma_d: float = 0.05, detector: float = 0.003):
    """Zero-delay g2 far from resonance vs the uncorrelated-emitter forms.

    Returns (instantaneous error, beat-averaged error): without smoothing the
    main path must match twice the beat-averaged value; with detector jitter
    long against the beat but short against the decay it must match the
    beat-averaged value itself.
    """
    params = SystemParams(gamma1=gamma, gamma2=gamma, gamma_d=gamma_d, gamma_p=0.01 * gamma, beta=0.8, delta=delta)
    p = oracle.pumped_population(params.gamma_p, gamma)
    h = detector / 4
    taus = np.arange(0.0, 40 * detector + h / 2, h)
    trace = g2_trace(params, taus)
    inst = abs(trace.values[0] - oracle.independent_g2_zero_instantaneous(gamma, gamma, p, p))
    smooth = convolve_detector(trace, detector).values[0]
    return float(inst), float(abs(smooth - oracle.independent_g2_zero(gamma, gamma, p, p)))


def run_all(random_sets: int = 5, seed: int = 2024) -> list[CheckResult]:
    results = []

    def timed(name, tol, fn, *args):
        t0 = time.perf_counter()
        err = fn(*args)
        results.append(CheckResult(name, float(err), tol, time.perf_counter() - t0))

    timed("dicke_pair_intensity", 1e-8, check_dicke)
    timed("bright_dark_rates", 1e-9, check_bright_dark)
    timed("single_emitter_closed_form", 1e-10, check_single_emitter)
    timed("pumped_populations", 1e-10, check_pumped_populations)

    timed("far_detuned_g2_zero_instantaneous", 2e-3, lambda: check_independent_limit()[0])
    timed("far_detuned_g2_zero_beat_averaged", 2e-3, lambda: check_independent_limit()[1])

    rng = np.random.default_rng(seed)
    draws = [(random_params(rng), random_state(rng)) for _ in range(random_sets)]
    pumped = [random_params(rng, pumped=True) for _ in range(random_sets)]
    if random_sets:
        timed(f"euler_states_x{random_sets}", STATE_TOL, lambda: max(check_euler_states(p, r) for p, r in draws))
        timed(f"photon_budget_x{random_sets}", BUDGET_TOL, lambda: max(check_budget(p, r) for p, r in draws))
        timed(f"brute_force_g2_x{random_sets}", G2_TOL, lambda: max(check_brute_g2(p) for p in pumped))
    return results
