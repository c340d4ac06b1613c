"""Spectral wandering (Gaussian detuning average) and Gaussian timing jitter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import ndtr

from .core import SystemParams, basis_state, collective_operator
from .observables import TimeSeries, g2_components, intensity, raw_intensity

DEFAULT_NODES = 21
DEFAULT_SIGMA_IRF = 0.15  # ns


@dataclass(frozen=True)
class WanderingEnsemble:
    """Quadrature nodes (detuning in ueV, weight) for a Gaussian detuning distribution."""

    mean_detuning: float
    sigma: float
    nodes: tuple
    scheme: str = "gauss-hermite"

    @property
    def detunings(self) -> np.ndarray:
        return np.array([d for d, _ in self.nodes])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.nodes])


@dataclass(frozen=True)
class InstrumentResponse:
    """Gaussian timing response with standard deviation ``sigma_irf`` (ns)."""

    sigma_irf: float = DEFAULT_SIGMA_IRF

    def __post_init__(self):
        if not math.isfinite(self.sigma_irf) or self.sigma_irf < 0:
            raise ValueError(f"sigma_irf must be >= 0, got {self.sigma_irf!r}")


def gauss_hermite_ensemble(mean: float, sigma: float, n_nodes: int = DEFAULT_NODES) -> WanderingEnsemble:
    """Nodes ``mean + sqrt(2) sigma x_k`` with weights ``w_k / sqrt(pi)``.

    ``n_nodes`` must be odd so that the centre node exists and sigma -> 0
    collapses onto the mean.
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be >= 0, got {sigma!r}")
    if n_nodes < 1 or n_nodes % 2 == 0:
        raise ValueError(f"n_nodes must be a positive odd integer, got {n_nodes!r}")
    if sigma == 0 or n_nodes == 1:
        return WanderingEnsemble(mean, sigma, ((float(mean), 1.0),))
    x, w = hermgauss(n_nodes)
    w = w / w.sum()
    # enforce exact mirror symmetry about the mean
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    nodes = tuple((float(mean + math.sqrt(2.0) * sigma * xi), float(wi)) for xi, wi in zip(x, w))
    return WanderingEnsemble(mean, sigma, nodes)


def wandering_average_intensity(params: SystemParams, ensemble: WanderingEnsemble, rho0=None, times=None) -> TimeSeries:
    """Average unnormalised intensity over the detuning nodes, then normalise to the peak."""
    if rho0 is None:
        rho0 = basis_state("e1g2")
    times = np.asarray(times, dtype=float)
    total = np.zeros_like(times)
    for delta, weight in ensemble.nodes:
        total = total + weight * raw_intensity(params.replace(delta=delta), rho0, times)
    peak = float(np.max(total))
    if peak <= 0:
        raise ValueError("averaged intensity vanishes; normalisation undefined")
    return TimeSeries(times, total / peak, "intensity", {"divided_by": "peak", "peak": peak, "sigma_ueV": ensemble.sigma})


@dataclass(frozen=True)
class AveragedG2:
    taus: np.ndarray
    numerator: np.ndarray
    stationary_intensity: float

    @property
    def g2(self) -> np.ndarray:
        return self.numerator / self.stationary_intensity**2


def wandering_average_g2_components(params: SystemParams, ensemble: WanderingEnsemble, taus) -> AveragedG2:
    taus = np.asarray(taus, dtype=float)
    numerator = np.zeros_like(taus)
    i_ss = 0.0
    for delta, weight in ensemble.nodes:
        comp = g2_components(params.replace(delta=delta), taus)
        numerator = numerator + weight * comp.numerator
        i_ss += weight * comp.stationary_intensity
    return AveragedG2(taus, numerator, i_ss)


def wandering_average_g2(params: SystemParams, ensemble: WanderingEnsemble, taus) -> TimeSeries:
    """Ensemble g2: averaged numerator divided by the squared averaged intensity."""
    comp = wandering_average_g2_components(params, ensemble, taus)
    return TimeSeries(comp.taus, comp.g2, "g2", {"divided_by": "<I_ss>^2", "I_ss": comp.stationary_intensity, "sigma_ueV": ensemble.sigma})


def _ramp_gauss(x, s):
    # integral of max(u, 0) * N(x - u; 0, s^2) du
    return x * ndtr(x / s) + s * np.exp(-0.5 * (x / s) ** 2) / math.sqrt(2 * math.pi)


def _half_hat_weight(x, h, s):
    # Gaussian-weighted integral of the falling half hat on [0, h]
    return ndtr(x / s) - (_ramp_gauss(x, s) - _ramp_gauss(x - h, s)) / h


def gaussian_smooth(values: np.ndarray, h: float, s: float) -> np.ndarray:
    """Convolve the piecewise-linear interpolant of ``values`` (zero outside the grid) with N(0, s^2).

    Returned at the original sample points. Weights are exact integrals of
    the Gaussian against each interpolation hat.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    m = int(math.ceil(9.0 * s / h)) + 1
    offsets = np.arange(-m, m + 1) * h
    kernel = _half_hat_weight(offsets, h, s) + _half_hat_weight(-offsets, h, s)
    out = np.convolve(values, kernel)[m : m + n]
    # the grid ends carry only the inner half of their hat
    rel = np.arange(n) * h
    out -= values[0] * _half_hat_weight(-rel, h, s)
    out -= values[-1] * _half_hat_weight(rel[::-1], h, s)
    return out


def convolve_irf(trace: TimeSeries, irf: InstrumentResponse) -> TimeSeries:
    """Gaussian timing-jitter convolution on the trace's own (uniform) grid.

    The trace is treated as zero outside its grid; to keep the full area,
    the grid should start before t = 0 with zero padding.
    """
    s = irf.sigma_irf
    if s == 0:
        return TimeSeries(trace.times.copy(), trace.values.copy(), trace.kind, dict(trace.normalization))
    h = trace.step
    if h > s / 2:
        raise ValueError(f"sample spacing {h:g} ns under-resolves sigma_irf = {s:g} ns (need <= sigma/2)")
    out = gaussian_smooth(trace.values, h, s)
    if trace.kind == "intensity":
        out = np.maximum(out, 0.0)
    norm = dict(trace.normalization, sigma_irf_ns=s)
    return TimeSeries(trace.times.copy(), out, trace.kind, norm)


def convolve_detector(trace: TimeSeries, sigma_det: float) -> TimeSeries:
    """Gaussian detector-timing smoothing of a tau >= 0 correlation trace.

    The trace is mirrored to negative delays and held at its last value
    beyond the grid end before smoothing, so g2 -> 1 tails stay flat.
    """
    if sigma_det == 0:
        return TimeSeries(trace.times.copy(), trace.values.copy(), trace.kind, dict(trace.normalization))
    h = trace.step
    if abs(trace.times[0]) > 1e-12:
        raise ValueError("detector smoothing expects a trace starting at tau = 0")
    if h > sigma_det / 2:
        raise ValueError(f"sample spacing {h:g} ns under-resolves detector jitter {sigma_det:g} ns")
    v = trace.values
    pad = int(math.ceil(10.0 * sigma_det / h)) + 1
    full = np.concatenate([np.full(pad, v[-1]), v[:0:-1], v, np.full(pad, v[-1])])
    smooth = gaussian_smooth(full, h, sigma_det)
    start = pad + v.size - 1
    out = smooth[start : start + v.size]
    return TimeSeries(trace.times.copy(), out, trace.kind, dict(trace.normalization, detector_sigma_ns=sigma_det))


def lifetime_trace(
    params: SystemParams,
    ensemble: WanderingEnsemble,
    irf: InstrumentResponse,
    times: np.ndarray,
    rho0=None,
) -> TimeSeries:
    """Wandering-averaged, IRF-convolved waveguide intensity normalised to its peak.

    Samples at t < 0 are zero (excitation at t = 0).
    """
    times = np.asarray(times, dtype=float)
    if rho0 is None:
        rho0 = basis_state("e1g2")
    sigma = collective_operator(params.gamma1, params.gamma2)
    if intensity(rho0, sigma) <= 0:
        raise ValueError("initial intensity is zero")
    tol = 1e-9 * (times[1] - times[0]) if times.size > 1 else 0.0
    pos = times >= -tol  # grid points at t = 0 up to rounding
    t_pos = np.maximum(times[pos], 0.0)
    raw = np.zeros_like(times)
    for delta, weight in ensemble.nodes:
        raw[pos] += weight * raw_intensity(params.replace(delta=delta), rho0, t_pos)
    trace = TimeSeries(times, raw, "intensity")
    out = convolve_irf(trace, irf)
    peak = float(np.max(out.values))
    return TimeSeries(times, out.values / peak, "intensity", {"divided_by": "peak", "peak": peak, "sigma_irf_ns": irf.sigma_irf, "sigma_ueV": ensemble.sigma})


def hbt_trace(params: SystemParams, ensemble: WanderingEnsemble, taus: np.ndarray, detector_sigma: float = 0.0) -> TimeSeries:
    """Model HBT histogram: wandering-averaged g2, smoothed by detector jitter."""
    trace = wandering_average_g2(params, ensemble, taus)
    return convolve_detector(trace, detector_sigma)
