"""Exact propagation of the master equation and the regression machinery.

The generator is only 16x16, so it is diagonalised once and every time
point is evaluated in closed form. Near-defective spectra (exceptional
points such as the ideal resonant pair) switch to a per-point matrix
exponential instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import DIM, InvariantError, check_density, devectorize, trace_functional, vectorize

CONDITION_LIMIT = 1e8
RECONSTRUCTION_TOL = 1e-8
EXPM_BLOCK = 64


class NonUniqueSteadyStateWarning(RuntimeWarning):
    """The generator has more than one stationary state."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition ``L = R diag(eigenvalues) W`` with ``W = R^-1``.

    ``mode`` is ``"spectral"`` when the decomposition is used directly, or
    ``"expm"`` when the spectrum was too ill-conditioned and propagation
    falls back to scaling-and-squaring exponentials of ``generator``.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    condition_estimate: float
    generator: np.ndarray
    mode: str = "spectral"

    @property
    def uses_fallback(self) -> bool:
        return self.mode != "spectral"

    def reconstruct(self) -> np.ndarray:
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors


def decompose(liouv: np.ndarray) -> SpectralDecomposition:
    liouv = np.asarray(liouv, dtype=complex)
    evals, right = np.linalg.eig(liouv)
    cond = float(np.linalg.cond(right))
    mode = "spectral"
    left = np.zeros_like(right)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        mode = "expm"
    else:
        left = np.linalg.inv(right)
        recon = (right * evals) @ left
        scale = max(np.linalg.norm(liouv), 1.0)
        if np.linalg.norm(recon - liouv) / scale > RECONSTRUCTION_TOL:
            mode = "expm"
    if np.max(evals.real) > 1e-10 * max(1.0, np.max(np.abs(evals))):
        raise InvariantError(f"generator has a growing mode: max Re(lambda) = {np.max(evals.real):.3e}")
    return SpectralDecomposition(evals, right, left, cond, liouv, mode)


def _check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing")
    return times


def _evolve_uniform(generator, vec0, t0, h, n):
    # exact exponentials at block anchors, powers of the one-step propagator inside a block
    anchors = np.arange(0, n, EXPM_BLOCK)
    starts = np.stack([scipy.linalg.expm(generator * (t0 + k * h)) @ vec0 for k in anchors])
    step = scipy.linalg.expm(generator * h)
    powers = np.empty((EXPM_BLOCK, *step.shape), dtype=complex)
    powers[0] = np.eye(step.shape[0])
    for m in range(1, EXPM_BLOCK):
        powers[m] = step @ powers[m - 1]
    out = np.einsum("mij,bj->bmi", powers, starts).reshape(-1, vec0.size)
    return out[:n]


def evolve_vector(decomp: SpectralDecomposition, vec0: np.ndarray, times) -> np.ndarray:
    """Return ``exp(L t) vec0`` for each t as an array of shape (len(times), 16)."""
    times = _check_times(times)
    vec0 = np.asarray(vec0, dtype=complex)
    if decomp.mode == "spectral":
        coeffs = decomp.left_vectors @ vec0
        return (np.exp(np.outer(times, decomp.eigenvalues)) * coeffs) @ decomp.right_vectors.T
    if times.size > 2 * EXPM_BLOCK:
        steps = np.diff(times)
        h = steps[0]
        if h > 0 and np.allclose(steps, h, rtol=1e-9, atol=0.0):
            return _evolve_uniform(decomp.generator, vec0, times[0], h, times.size)
    out = np.empty((times.size, vec0.size), dtype=complex)
    for k, t in enumerate(times):
        out[k] = scipy.linalg.expm(decomp.generator * t) @ vec0
    return out


def expectation_trace(decomp: SpectralDecomposition, op: np.ndarray, vec0: np.ndarray, times) -> np.ndarray:
    """``Tr[op exp(L t)(X0)]`` for each t, with X0 given in vectorised form."""
    times = _check_times(times)
    row = vectorize(np.asarray(op).T)
    if decomp.mode == "spectral":
        weights = (row @ decomp.right_vectors) * (decomp.left_vectors @ np.asarray(vec0, dtype=complex))
        return np.exp(np.outer(times, decomp.eigenvalues)) @ weights
    return evolve_vector(decomp, vec0, times) @ row


def propagate(decomp: SpectralDecomposition, rho0: np.ndarray, times, check: bool = True) -> np.ndarray:
    """Density operators rho(t) = exp(L t) rho0, shape (len(times), 4, 4)."""
    vecs = evolve_vector(decomp, vectorize(rho0), times)
    states = vecs.reshape(-1, DIM, DIM).transpose(0, 2, 1)
    if check:
        for t, rho in zip(np.atleast_1d(times), states):
            try:
                check_density(rho, herm_tol=1e-9, trace_tol=1e-9)
            except InvariantError as exc:
                raise InvariantError(f"at t = {t:g} ns: {exc}") from None
    return 0.5 * (states + states.conj().transpose(0, 2, 1))


def regression_evolve(decomp: SpectralDecomposition, seed: np.ndarray, taus) -> np.ndarray:
    """Propagate an arbitrary operator ``seed`` under the generator (no normalisation)."""
    vecs = evolve_vector(decomp, vectorize(seed), taus)
    return vecs.reshape(-1, DIM, DIM).transpose(0, 2, 1)


def null_space_dimension(liouv: np.ndarray, rtol: float = 1e-10) -> int:
    sv = np.linalg.svd(liouv, compute_uv=False)
    return int(np.sum(sv <= rtol * max(sv[0], 1.0)))


def steady_state(liouv: np.ndarray) -> np.ndarray:
    """Stationary density operator from the trace-bordered linear system.

    If the stationary state is not unique (e.g. no pumping) a
    :class:`NonUniqueSteadyStateWarning` is raised and the ground state is
    returned when it is stationary.
    """
    liouv = np.asarray(liouv, dtype=complex)
    n2 = liouv.shape[0]
    n = int(round(np.sqrt(n2)))
    if null_space_dimension(liouv) > 1:
        warnings.warn("steady state is not unique", NonUniqueSteadyStateWarning, stacklevel=2)
        ground = np.zeros(n2, dtype=complex)
        ground[0] = 1.0
        if np.linalg.norm(liouv @ ground) < 1e-10:
            return devectorize(ground)
    bordered = np.vstack([liouv, trace_functional(n)[None, :]])
    rhs = np.zeros(n2 + 1, dtype=complex)
    rhs[-1] = 1.0
    vec = np.linalg.lstsq(bordered, rhs, rcond=None)[0]
    rho = devectorize(vec, check=False)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = np.linalg.norm(liouv @ vectorize(rho))
    if residual > 1e-10 * max(1.0, np.linalg.norm(liouv)):
        raise InvariantError(f"steady-state residual {residual:.3e} too large")
    return rho
