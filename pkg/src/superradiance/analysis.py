"""Decay-time metrics, beat periods and joint fitting of (gamma_d, sigma) to HBT data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import SystemParams
from .ensemble import DEFAULT_NODES, gauss_hermite_ensemble, hbt_trace
from .observables import TimeSeries

STANDARD_THRESHOLDS = (0.5, 1.0 / math.e, 0.1)


@dataclass(frozen=True)
class DecayMetrics:
    """Threshold crossing times tau(eps) measured from the trace maximum.

    ``times`` and ``uncertainties`` are in ns; a threshold that is never
    crossed inside the trace is reported as ``inf``. ``method`` labels the
    uncertainty heuristic.
    """

    thresholds: tuple
    times: tuple
    uncertainties: tuple
    peak_time: float
    method: str = "linear-interpolation; half-spacing heuristic"

    def as_dict(self) -> dict:
        return {float(e): (t, u) for e, t, u in zip(self.thresholds, self.times, self.uncertainties)}


def threshold_times(trace: TimeSeries, thresholds=STANDARD_THRESHOLDS, errors=None) -> DecayMetrics:
    """Delay from the peak to the first downward crossing of eps * I_max (linear interpolation).

    Uncertainty is half the local sample spacing, combined in quadrature
    with ``errors`` (per-sample value uncertainty) divided by the local
    slope when those are given.
    """
    t, v = trace.times, trace.values
    ipk = int(np.argmax(v))
    vmax = v[ipk]
    if vmax <= 0:
        raise ValueError("trace maximum must be positive")
    times, uncs = [], []
    for eps in thresholds:
        if not 0 < eps < 1:
            raise ValueError(f"threshold must lie in (0, 1), got {eps!r}")
        level = eps * vmax
        below = np.nonzero(v[ipk:] < level)[0]
        if below.size == 0:
            times.append(math.inf)
            uncs.append(math.inf)
            continue
        k = ipk + int(below[0])
        t0, t1, v0, v1 = t[k - 1], t[k], v[k - 1], v[k]
        slope = (v1 - v0) / (t1 - t0)
        times.append(float(t0 + (level - v0) / slope - t[ipk]))
        unc = 0.5 * (t1 - t0)
        if errors is not None:
            unc = math.hypot(unc, 0.5 * (errors[k - 1] + errors[k]) / abs(slope))
        uncs.append(float(unc))
    return DecayMetrics(tuple(float(e) for e in thresholds), tuple(times), tuple(uncs), float(t[ipk]))


def _symmetric_spectrum(y, h, pad_factor):
    # real spectrum of the even extension y(|tau|), centred on index 0
    n = int(2 ** math.ceil(math.log2(2 * len(y) * pad_factor)))
    buf = np.zeros(n)
    buf[: len(y)] = y
    buf[n - len(y) + 1 :] = y[:0:-1]
    return np.fft.rfftfreq(n, h), np.fft.rfft(buf).real * h


def matrix_pencil(y, h, rtol=1e-9, max_order=24):
    """Complex rates and amplitudes of ``y_k = sum_m a_m exp(lambda_m k h)``.

    Hua-Sarkar matrix pencil on the Hankel matrix of the samples; the model
    order is the number of singular values above ``rtol`` times the largest,
    capped at ``max_order``.
    """
    y = np.asarray(y, dtype=complex)
    n = y.size
    pencil = n // 3
    hankel = np.lib.stride_tricks.sliding_window_view(y, pencil + 1)
    _, s, vh = np.linalg.svd(hankel, full_matrices=False)
    order = max(1, min(int(np.sum(s > rtol * s[0])), max_order))
    v = vh[:order].conj().T
    z = np.linalg.eigvals(np.linalg.pinv(v[:-1]) @ v[1:])
    # drop vanishing and strongly growing (spurious) modes
    z = z[(np.abs(z) > 1e-300) & (n * np.log(np.maximum(np.abs(z), 1e-300)) < 30.0)]
    amps = np.linalg.lstsq(np.vander(z, n, increasing=True).T, y, rcond=None)[0]
    return np.log(z) / h, amps


def beat_period(trace: TimeSeries, tail_fraction: float = 0.2, pad_factor: int = 8, snr: float = 3.0):
    """Dominant beat period (ns) of a g2 trace, or ``None`` if there is no clear beat.

    Detection uses the spectrum of the mean-removed, mirrored trace: the
    strongest peak past the zero-frequency lobe must exceed ``snr`` times
    the median spectral magnitude. Its parabolically interpolated position
    seeds the estimate, which is then refined to the damped oscillatory
    mode found by a matrix-pencil decomposition of the trace (peak
    positions alone are pulled by the non-oscillating background when the
    beat is strongly damped).
    """
    h = trace.step
    v = trace.values
    ntail = max(int(len(v) * tail_fraction), 1)
    y = v - np.mean(v[-ntail:])
    freqs, spec = _symmetric_spectrum(y, h, pad_factor)
    floor = float(np.median(np.abs(spec)))
    start = 1
    while start < len(spec) - 1 and spec[start] <= spec[start - 1]:
        start += 1
    if start >= len(spec) - 1:
        return None
    k = start + int(np.argmax(spec[start:-1]))
    if spec[k] <= 0 or spec[k] < snr * floor:
        return None
    a, b, c = spec[k - 1], spec[k], spec[k + 1]
    denom = a - 2 * b + c
    f_dft = freqs[k] + (0.5 * (a - c) / denom if denom != 0 else 0.0) * (freqs[1] - freqs[0])
    if f_dft <= 0:
        return None

    # decimate to ~16 samples per beat period, at most ~600 samples
    stride = max(1, int(1.0 / (16 * f_dft * h)), int(math.ceil(len(y) / 600)))
    rates, amps = matrix_pencil(y[::stride], h * stride)
    ang = np.abs(rates.imag) / (2 * math.pi)
    scale = float(np.max(np.abs(y))) or 1.0
    # underdamped modes near the spectral peak carrying visible amplitude
    ok = (
        (ang > 0.5 * f_dft)
        & (ang < 2.0 * f_dft)
        & (np.abs(rates.real) < np.abs(rates.imag))
        & (np.abs(amps) > 1e-2 * scale)
    )
    if not np.any(ok):
        return None
    weight = np.abs(amps[ok])
    return float(1.0 / (np.sum(weight * ang[ok]) / np.sum(weight)))


@dataclass(frozen=True)
class FitResult:
    gamma_d: float
    sigma: float
    residual: float
    iterations: int
    converged: bool
    covariance: np.ndarray | None = None
    evaluations: int = 0
    initial: tuple = ()
    initial_residual: float = math.nan
    message: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def stderr(self):
        if self.covariance is None:
            return (math.nan, math.nan)
        d = np.diag(self.covariance)
        return tuple(float(math.sqrt(x)) if x >= 0 else math.nan for x in d)

    def as_dict(self) -> dict:
        cov = None if self.covariance is None else np.asarray(self.covariance).tolist()
        return {
            "gamma_d": self.gamma_d,
            "sigma": self.sigma,
            "residual": self.residual,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "covariance": cov,
            "stderr": list(self.stderr),
            "initial": list(self.initial),
            "initial_residual": self.initial_residual,
            "message": self.message,
            **({"metadata": self.metadata} if self.metadata else {}),
        }


@dataclass(frozen=True)
class Dataset:
    """One measured (or synthetic) g2 trace at a given mean detuning (ueV)."""

    mean_detuning: float
    trace: TimeSeries
    errors: np.ndarray | None = None


class HBTModel:
    """Model g2(tau) for a dataset given the shared (gamma_d, sigma)."""

    def __init__(self, fixed: SystemParams, n_nodes: int = DEFAULT_NODES, detector_sigma: float = 0.0):
        self.fixed = fixed
        self.n_nodes = n_nodes
        self.detector_sigma = detector_sigma

    def __call__(self, dataset: Dataset, gamma_d: float, sigma: float) -> np.ndarray:
        params = self.fixed.replace(gamma_d=gamma_d, delta=dataset.mean_detuning)
        ensemble = gauss_hermite_ensemble(dataset.mean_detuning, sigma, self.n_nodes)
        return hbt_trace(params, ensemble, dataset.trace.times, self.detector_sigma).values


def _objective_factory(datasets, model):
    weights = []
    for ds in datasets:
        if ds.errors is not None:
            err = np.asarray(ds.errors, dtype=float)
            if np.any(err <= 0):
                raise ValueError("error bars must be positive")
            weights.append(1.0 / err**2)
        else:
            weights.append(np.ones_like(ds.trace.values))

    def objective(x):
        gamma_d, sigma = float(x[0]), float(x[1])
        if gamma_d < 0 or sigma < 0:
            return math.inf
        total = 0.0
        for ds, w in zip(datasets, weights):
            r = model(ds, gamma_d, sigma) - ds.trace.values
            total += float(np.sum(w * r * r))
        return total

    return objective


def _hessian(f, x, rel=1e-3):
    x = np.asarray(x, dtype=float)
    n = x.size
    steps = rel * np.maximum(np.abs(x), 1e-2)
    hess = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        for j in range(i, n):
            ej = np.zeros(n)
            ej[j] = steps[j]
            if i == j:
                val = (f(x + ei) - 2 * f0 + f(x - ei)) / steps[i] ** 2
            else:
                val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    return hess


def fit_parameters(
    datasets,
    fixed: SystemParams,
    init=(5.0, 1.0),
    n_nodes: int = DEFAULT_NODES,
    detector_sigma: float = 0.0,
    max_iter: int = 400,
    xatol: float = 1e-5,
    fatol: float = 1e-10,
) -> FitResult:
    """Joint least-squares fit of shared (gamma_d, sigma) across datasets.

    Nelder-Mead simplex from a fixed initial simplex, so repeated calls are
    bitwise identical. ``fatol`` is relative to the objective at ``init``,
    since an absolute tolerance below the float spacing of a large
    chi-square never triggers. The covariance comes from a
    finite-difference Hessian of the objective at the optimum.
    """
    datasets = list(datasets)
    if not datasets:
        raise ValueError("need at least one dataset")
    model = HBTModel(fixed, n_nodes=n_nodes, detector_sigma=detector_sigma)
    objective = _objective_factory(datasets, model)
    x0 = np.array(init, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("initial values must be non-negative")
    f_init = objective(x0)
    simplex = np.array([x0, x0 + [0.2 * max(x0[0], 0.5), 0.0], x0 + [0.0, 0.2 * max(x0[1], 0.25)]])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=[(0.0, None), (0.0, None)],
        options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol * max(abs(f_init), 1.0), "maxiter": max_iter, "maxfev": 4 * max_iter},
    )
    x = np.asarray(res.x, dtype=float)
    f_best = float(res.fun)
    if f_best > f_init:
        x, f_best = x0, f_init
    n_points = sum(len(ds.trace) for ds in datasets)
    cov = None
    try:
        hess = _hessian(objective, np.maximum(x, 1e-6))
        dof = max(n_points - 2, 1)
        cov = 2.0 * (f_best / dof) * np.linalg.inv(hess)
    except (np.linalg.LinAlgError, ValueError):
        cov = None
    if cov is not None and not np.all(np.isfinite(cov)):
        cov = None
    return FitResult(
        gamma_d=float(x[0]),
        sigma=float(x[1]),
        residual=f_best,
        iterations=int(res.nit),
        converged=bool(res.success),
        covariance=cov,
        evaluations=int(res.nfev),
        initial=tuple(float(v) for v in x0),
        initial_residual=float(f_init),
        message=str(res.message),
    )
