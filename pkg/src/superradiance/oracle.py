"""Independent reference computations.

Nothing here touches the superoperator/eigendecomposition path in
:mod:`superradiance.dynamics`: the master equation is evaluated in
operator form (``H rho``, ``L rho L^+``) and integrated by explicit Euler
steps, and closed forms cover the limiting cases.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from ._backend import kernels
from .core import (
    DIM,
    SystemParams,
    build_hamiltonian,
    collective_operator,
    jump_operators,
)


def master_rhs(params: SystemParams, rho: np.ndarray, with_pump: bool = False) -> np.ndarray:
    """drho/dt = -i[H, rho] + sum_k (L rho L^+ - {L^+ L, rho}/2), directly in operator form."""
    h = build_hamiltonian(params.delta)
    out = -1j * (h @ rho - rho @ h)
    for op in jump_operators(params, with_pump=with_pump):
        odo = op.conj().T @ op
        out = out + op @ rho @ op.conj().T - 0.5 * (odo @ rho + rho @ odo)
    return out


def _sandwich_terms(ops):
    # out[i, j] += c * rho[a, b] for c = L[i, a] * conj(L[j, b]), nonzero entries only
    idx, coef = [], []
    for op in ops:
        nz = np.argwhere(np.abs(op) > 0)
        for i, a in nz:
            for j, b in nz:
                idx.append((i, j, a, b))
                coef.append(op[i, a] * np.conj(op[j, b]))
    idx = np.array(idx, dtype=np.int32).reshape(-1, 4)
    return np.ascontiguousarray(idx), np.ascontiguousarray(np.array(coef, dtype=complex))


def _euler_setup(params, with_pump):
    ops = jump_operators(params, with_pump=with_pump)
    heff = build_hamiltonian(params.delta).astype(complex)
    for op in ops:
        heff = heff - 0.5j * (op.conj().T @ op)
    idx, coef = _sandwich_terms(ops)
    return np.ascontiguousarray(heff), idx, coef


def max_step(params: SystemParams, with_pump: bool = False) -> float:
    """Largest admissible Euler step, 1e-4 / (largest rate)."""
    rate = params.max_rate
    if with_pump:
        rate = max(rate, 2 * params.gamma_p)
    return 1e-4 / rate


def euler_trajectory(params: SystemParams, rho0, times, dt: float, with_pump: bool = False, extrapolate: bool = False):
    """Explicit Euler states at each of ``times`` (which must be multiples of dt).

    With ``extrapolate`` the first-order error is cancelled by Richardson
    extrapolation, ``2 rho(dt/2) - rho(dt)``.
    """
    if dt <= 0 or dt > max_step(params, with_pump) * (1 + 1e-12):
        raise ValueError(f"dt = {dt:g} ns exceeds the admissible step {max_step(params, with_pump):g} ns")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    steps = times / dt
    if np.any(np.abs(steps - np.rint(steps)) > 1e-6):
        raise ValueError("every output time must be a whole number of Euler steps")
    heff, idx, coef = _euler_setup(params, with_pump)
    rho0 = np.ascontiguousarray(np.asarray(rho0, dtype=complex))

    def run(step):
        checkpoints = np.ascontiguousarray(np.rint(times / step).astype(np.int64))
        return kernels.euler_integrate(heff, idx, coef, rho0, step, checkpoints)

    coarse = run(dt)
    if not extrapolate:
        return coarse
    return 2 * run(dt / 2) - coarse


def euler_propagate(params: SystemParams, rho0, t_end: float, dt: float, with_pump: bool = False, extrapolate: bool = False):
    """State at ``t_end`` by explicit Euler integration (see :func:`euler_trajectory`).

    ``dt`` is shrunk slightly so that ``t_end`` is a whole number of steps.
    """
    if t_end > 0:
        dt = t_end / math.ceil(t_end / dt - 1e-9)
    return euler_trajectory(params, rho0, [t_end], dt, with_pump=with_pump, extrapolate=extrapolate)[0]


def brute_force_generator(params: SystemParams, with_pump: bool = False) -> np.ndarray:
    """Matrix of the master equation obtained by applying it to each matrix unit."""
    cols = []
    for b in range(DIM):
        for a in range(DIM):
            unit = np.zeros((DIM, DIM), dtype=complex)
            unit[a, b] = 1.0
            cols.append(master_rhs(params, unit, with_pump).T.reshape(-1))
    return np.array(cols).T


def brute_force_steady_state(params: SystemParams) -> np.ndarray:
    """Pumped stationary state from the SVD null space of the brute-force generator."""
    null = scipy.linalg.null_space(brute_force_generator(params, with_pump=True), rcond=1e-10)
    if null.shape[1] != 1:
        raise ValueError(f"stationary state not unique (null space dimension {null.shape[1]})")
    rho = null[:, 0].reshape(DIM, DIM).T
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def brute_force_g2(params: SystemParams, taus, dt: float | None = None) -> np.ndarray:
    """g2(tau) by Euler-propagating S rho_ss S^+ in operator form (Richardson extrapolated)."""
    if dt is None:
        dt = max_step(params, with_pump=True)
    sigma = collective_operator(params.gamma1, params.gamma2)
    sds = sigma.conj().T @ sigma
    rho_ss = brute_force_steady_state(params)
    i_ss = np.trace(sds @ rho_ss).real
    seed = sigma @ rho_ss @ sigma.conj().T
    taus = np.asarray(taus, dtype=float)
    # snap dt so every tau is a whole number of steps
    grid = np.gcd.reduce(np.rint(taus / 1e-6).astype(np.int64)) * 1e-6 if np.any(taus > 0) else dt
    dt = grid / math.ceil(grid / dt)
    states = euler_trajectory(params, seed, taus, dt, with_pump=True, extrapolate=True)
    return np.array([np.trace(sds @ x).real for x in states]) / i_ss**2


def analytic_single_emitter(gamma: float, gamma_d: float, t, pe0: float = 1.0, coh0: complex = 1.0):
    """Excited population and coherence of one decaying, dephasing two-level emitter.

    The dephasing channel D[sqrt(gamma_d) s+ s-] damps the coherence at
    gamma_d / 2, so the coherence envelope is exp(-(gamma + gamma_d) t / 2).
    """
    t = np.asarray(t, dtype=float)
    return pe0 * np.exp(-gamma * t), coh0 * np.exp(-0.5 * (gamma + gamma_d) * t)


def analytic_dicke_pair(gamma: float, beta: float, t):
    """Normalised waveguide intensity from |e1 g2> for a resonant, undephased identical pair.

    The state splits equally into bright and dark halves with amplitude
    decay rates (1 + beta) gamma / 2 and (1 - beta) gamma / 2; only the
    bright half emits into the waveguide, so I(t)/I(0) = exp(-(1 + beta) gamma t).
    """
    return np.exp(-(1.0 + beta) * gamma * np.asarray(t, dtype=float))


def dicke_pair_rates(gamma: float, beta: float) -> tuple[float, float]:
    """Bright and dark population decay rates (ns^-1)."""
    return (1.0 + beta) * gamma, (1.0 - beta) * gamma


def dicke_pair_excitation(gamma: float, beta: float, t):
    """Total excitation from |e1 g2>: equal mixture of bright and dark decays."""
    rb, rd = dicke_pair_rates(gamma, beta)
    t = np.asarray(t, dtype=float)
    return 0.5 * (np.exp(-rb * t) + np.exp(-rd * t))


def pumped_population(gamma_p: float, gamma: float, gamma_nr: float = 0.0) -> float:
    """Stationary excited population of one incoherently pumped two-level emitter."""
    return gamma_p / (gamma_p + gamma + gamma_nr)


def independent_g2_zero(gamma1: float, gamma2: float, p1: float, p2: float) -> float:
    """Zero-delay g2 of two uncorrelated emitters once their beat is averaged out.

    2 g1 g2 p1 p2 / (g1 p1 + g2 p2)^2; 0.5 for balanced emission.
    """
    return 2.0 * gamma1 * gamma2 * p1 * p2 / (gamma1 * p1 + gamma2 * p2) ** 2


def independent_g2_zero_instantaneous(gamma1: float, gamma2: float, p1: float, p2: float) -> float:
    """Exact tau = 0 value for uncorrelated emitters, interference term included (twice the beat-averaged one)."""
    return 2.0 * independent_g2_zero(gamma1, gamma2, p1, p2)


def detuned_beat_frequency(delta: float, gamma: float, beta: float) -> float:
    """Beat angular frequency (rad/ns) for identical emitters without dephasing.

    From the single-excitation effective Hamiltonian
    (delta/2) sz - (i gamma / 2)[[1, beta], [beta, 1]]: sqrt(delta^2 - (beta gamma)^2),
    zero below the exceptional point.
    """
    from .core import detuning_to_angular

    w = detuning_to_angular(delta)
    return math.sqrt(max(w * w - (beta * gamma) ** 2, 0.0))
