"""Waveguide intensity, two-photon correlations and photon bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from ._backend import kernels
from .core import (
    N1,
    N2,
    SystemParams,
    basis_state,
    build_liouvillian,
    collective_operator,
    expectation,
    vectorize,
)
from .dynamics import decompose, steady_state

INTENSITY_FLOOR = 1e-12


@dataclass
class TimeSeries:
    """Ordered (time, value) samples.

    ``kind`` is one of ``"intensity"``, ``"g2"``, ``"population"``;
    ``normalization`` records what the raw values were divided by.
    """

    times: np.ndarray
    values: np.ndarray
    kind: str = "intensity"
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if self.kind == "intensity" and np.any(self.values < 0):
            raise ValueError("intensity traces must be non-negative")

    def __len__(self):
        return self.times.size

    @property
    def step(self) -> float:
        """Uniform sample spacing; raises if the grid is not uniform."""
        dt = np.diff(self.times)
        if dt.size == 0:
            raise ValueError("need at least two samples")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1.0):
            raise ValueError("trace is not uniformly sampled")
        return float(dt[0])


def _clamp(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.where(values < INTENSITY_FLOOR, np.maximum(values, 0.0), values)


def intensity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Unnormalised waveguide intensity <Sigma^+ Sigma> in ns^-1."""
    value = expectation(sigma.conj().T @ sigma, rho).real
    return 0.0 if value < INTENSITY_FLOOR else value


def _spectral_expectation(decomp, op, vec0, times) -> np.ndarray:
    # Same contraction as dynamics.expectation_trace, routed through the compiled kernel.
    if decomp.mode != "spectral":
        from .dynamics import expectation_trace

        return expectation_trace(decomp, op, vec0, times)
    row = vectorize(np.asarray(op).T)
    weights = (row @ decomp.right_vectors) * (decomp.left_vectors @ vec0)
    return kernels.spectral_sum(
        np.ascontiguousarray(weights), np.ascontiguousarray(decomp.eigenvalues), np.ascontiguousarray(times, dtype=float)
    )


def raw_intensity(params: SystemParams, rho0: np.ndarray, times) -> np.ndarray:
    """Unnormalised <Sigma^+ Sigma>(t) from rho0, no pumping."""
    sigma = collective_operator(params.gamma1, params.gamma2)
    decomp = decompose(build_liouvillian(params, with_pump=False))
    return _clamp(_spectral_expectation(decomp, sigma.conj().T @ sigma, vectorize(rho0), times).real)


def intensity_trace(params: SystemParams, rho0: np.ndarray | None = None, times=None) -> TimeSeries:
    """Waveguide intensity normalised to its t = 0 value.

    The default initial state has only emitter 1 excited, |e1 g2>.
    """
    if rho0 is None:
        rho0 = basis_state("e1g2")
    times = np.asarray(times, dtype=float)
    sigma = collective_operator(params.gamma1, params.gamma2)
    i0 = intensity(rho0, sigma)
    if i0 <= 0:
        raise ValueError("initial intensity is zero; normalisation undefined")
    values = raw_intensity(params, rho0, times) / i0
    return TimeSeries(times, values, "intensity", {"divided_by": "I(0)", "I0": i0})


@dataclass(frozen=True)
class G2Components:
    """Unnormalised pieces of the stationary correlation, kept for averaging."""

    taus: np.ndarray
    numerator: np.ndarray
    stationary_intensity: float

    @property
    def g2(self) -> np.ndarray:
        return self.numerator / self.stationary_intensity**2


def g2_components(params: SystemParams, taus) -> G2Components:
    """Numerator Tr[S^+S exp(L tau)(S rho_ss S^+)] and <S^+S>_ss."""
    if params.gamma_p <= 0:
        raise ValueError("g2 needs a pumped steady state (gamma_p > 0)")
    taus = np.asarray(taus, dtype=float)
    liouv = build_liouvillian(params, with_pump=True)
    rho_ss = steady_state(liouv)
    sigma = collective_operator(params.gamma1, params.gamma2)
    sds = sigma.conj().T @ sigma
    i_ss = expectation(sds, rho_ss).real
    if i_ss <= INTENSITY_FLOOR:
        raise ValueError("stationary intensity is zero; g2 undefined")
    seed = sigma @ rho_ss @ sigma.conj().T
    decomp = decompose(liouv)
    numerator = _spectral_expectation(decomp, sds, vectorize(seed), taus).real
    return G2Components(taus, numerator, i_ss)


def g2_trace(params: SystemParams, taus) -> TimeSeries:
    """Stationary g2(tau) for tau >= 0 via the quantum regression theorem.

    Negative delays follow from g2(-tau) = g2(tau); see :func:`mirror`.
    """
    comp = g2_components(params, taus)
    return TimeSeries(comp.taus, comp.g2, "g2", {"divided_by": "I_ss^2", "I_ss": comp.stationary_intensity})


def mirror(trace: TimeSeries) -> TimeSeries:
    """Extend a tau >= 0 trace to negative delays by symmetry."""
    t, v = trace.times, trace.values
    start = 1 if t[0] == 0 else 0
    return TimeSeries(
        np.concatenate([-t[start:][::-1], t]),
        np.concatenate([v[start:][::-1], v]),
        trace.kind,
        dict(trace.normalization),
    )


@dataclass(frozen=True)
class PhotonBudget:
    waveguide: float
    leaked: float
    nonradiative: float
    remaining: float
    pumped: float = 0.0
    initial: float = 0.0

    @property
    def total(self) -> float:
        return self.waveguide + self.leaked + self.nonradiative + self.remaining

    @property
    def imbalance(self) -> float:
        """Output channels minus (initial excitation + pumped excitation)."""
        return self.total - self.initial - self.pumped


def photon_budget(params: SystemParams, rho0: np.ndarray, horizon: float, with_pump: bool = False) -> PhotonBudget:
    """Where the excitation went by ``horizon``: waveguide, side loss, nonradiative, still stored."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    decomp = decompose(build_liouvillian(params, with_pump=with_pump))
    sigma = collective_operator(params.gamma1, params.gamma2)
    vec0 = vectorize(rho0)
    b = params.beta
    ops = {
        "waveguide": b * (sigma.conj().T @ sigma),
        "leaked": (1 - b) * (params.gamma1 * N1 + params.gamma2 * N2),
        "nonradiative": params.gamma_nr * (N1 + N2),
    }
    if with_pump and params.gamma_p > 0:
        ops["pumped"] = params.gamma_p * (2 * np.eye(4) - N1 - N2)

    # integrands sampled through the decomposition; quad adapts the sampling
    def rate(op):
        return lambda t: float(np.real(_spectral_expectation(decomp, op, vec0, np.array([t]))[0]))

    decay_rates = np.unique(np.round(-decomp.eigenvalues.real[decomp.eigenvalues.real < -1e-12], 9))
    breaks = sorted({k / r for r in decay_rates for k in (1.0, 5.0, 20.0) if k / r < horizon})
    totals = {}
    for name, op in ops.items():
        if not np.any(op):
            totals[name] = 0.0
            continue
        val, _ = scipy.integrate.quad(rate(op), 0.0, horizon, epsabs=1e-11, epsrel=1e-11, limit=400, points=breaks or None)
        totals[name] = val
    remaining = float(np.real(_spectral_expectation(decomp, N1 + N2, vec0, np.array([horizon]))[0]))
    initial = expectation(N1 + N2, rho0).real
    return PhotonBudget(
        waveguide=totals["waveguide"],
        leaked=totals["leaked"],
        nonradiative=totals["nonradiative"],
        remaining=remaining,
        pumped=totals.get("pumped", 0.0),
        initial=initial,
    )
