"""Two-emitter state space, operator algebra and Lindblad generator assembly.

Basis ordering (fixed everywhere in the package)::

    index 0 = |g1 g2>,  1 = |g1 e2>,  2 = |e1 g2>,  3 = |e1 e2>

i.e. ``index = 2 * e1 + e2`` with emitter 1 as the first tensor factor.

Superoperators act on column-stacked density matrices,
``vec(A rho B) = (B.T kron A) vec(rho)``.

Units: rates in ns^-1, detuning in ueV, time in ns.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

HBAR_UEV_NS = 0.6582119569
"""Reduced Planck constant in ueV*ns."""

DIM = 4

_SM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e| with |g>=0, |e>=1
_I2 = np.eye(2, dtype=complex)

SIGMA1_MINUS = np.kron(_SM, _I2)
SIGMA2_MINUS = np.kron(_I2, _SM)
SIGMA1_PLUS = SIGMA1_MINUS.conj().T
SIGMA2_PLUS = SIGMA2_MINUS.conj().T
N1 = SIGMA1_PLUS @ SIGMA1_MINUS
N2 = SIGMA2_PLUS @ SIGMA2_MINUS

BASIS_LABELS = ("g1g2", "g1e2", "e1g2", "e1e2")


class InvariantError(RuntimeError):
    """A numerical object violated a physical invariant beyond tolerance."""


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters for one model instance.

    Attributes
    ----------
    gamma1, gamma2 : float
        Radiative decay rates of emitter 1 and 2 (ns^-1).
    gamma_d : float
        Pure dephasing rate, shared by both emitters (ns^-1).
    gamma_p : float
        Incoherent pump rate per emitter (ns^-1); zero for lifetime runs.
    beta : float
        Fraction of emission into the common waveguide mode.
    delta : float
        Detuning between the emitters (ueV); may be negative.
    gamma_nr : float
        Extra nonradiative decay per emitter, outside the collective channel (ns^-1).
    """

    gamma1: float = 1.0
    gamma2: float = 1.0
    gamma_d: float = 0.0
    gamma_p: float = 0.0
    beta: float = 1.0
    delta: float = 0.0
    gamma_nr: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma_d", "gamma_p", "gamma_nr"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.beta) or not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def max_rate(self) -> float:
        """Largest rate scale in the generator (ns^-1), detuning included."""
        return max(
            self.gamma1 + self.gamma2,
            self.gamma_d,
            self.gamma_p,
            self.gamma_nr,
            abs(self.delta) / HBAR_UEV_NS,
            1e-300,
        )


def detuning_to_angular(delta: float) -> float:
    """Convert a detuning in ueV to an angular frequency in rad/ns."""
    return delta / HBAR_UEV_NS


def basis_state(label: str) -> np.ndarray:
    """Projector onto one basis state, e.g. ``basis_state("e1g2")``."""
    matrix = np.zeros((DIM, DIM), dtype=complex)
    index = BASIS_LABELS.index(label)
    matrix[index, index] = 1.0
    return matrix


def ket_to_density(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def build_hamiltonian(delta: float) -> np.ndarray:
    """H/hbar = (delta/2)(n1 - n2) in rad/ns for a detuning given in ueV."""
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    return 0.5 * detuning_to_angular(delta) * (N1 - N2)


def collective_operator(gamma1: float, gamma2: float) -> np.ndarray:
    """Collective jump operator sqrt(gamma1) s1^- + sqrt(gamma2) s2^-."""
    if gamma1 < 0 or gamma2 < 0:
        raise ValueError("decay rates must be non-negative")
    return math.sqrt(gamma1) * SIGMA1_MINUS + math.sqrt(gamma2) * SIGMA2_MINUS


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.kron for square matrices without its generic reshaping overhead
    n, m = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * m, n * m)


def dissipator(op: np.ndarray) -> np.ndarray:
    """Superoperator of D[O] rho = O rho O^+ - {O^+ O, rho}/2."""
    op = np.asarray(op, dtype=complex)
    n = op.shape[0]
    eye = np.eye(n, dtype=complex)
    odo = op.conj().T @ op
    return _kron(op.conj(), op) - 0.5 * _kron(eye, odo) - 0.5 * _kron(odo.T, eye)


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of -i[H, rho]."""
    n = h.shape[0]
    eye = np.eye(n, dtype=complex)
    return -1j * (_kron(eye, h) - _kron(h.T, eye))


def jump_operators(params: SystemParams, with_pump: bool = False) -> list[np.ndarray]:
    """All Lindblad jump operators with their rates folded in.

    Channels with zero weight are dropped. The list is shared with the
    operator-form integrator in :mod:`superradiance.oracle`.
    """
    ops = []
    b = params.beta
    if b > 0:
        ops.append(math.sqrt(b) * collective_operator(params.gamma1, params.gamma2))
    if b < 1:
        ops.append(math.sqrt((1 - b) * params.gamma1) * SIGMA1_MINUS)
        ops.append(math.sqrt((1 - b) * params.gamma2) * SIGMA2_MINUS)
    if params.gamma_d > 0:
        ops.append(math.sqrt(params.gamma_d) * N1)
        ops.append(math.sqrt(params.gamma_d) * N2)
    if params.gamma_nr > 0:
        ops.append(math.sqrt(params.gamma_nr) * SIGMA1_MINUS)
        ops.append(math.sqrt(params.gamma_nr) * SIGMA2_MINUS)
    if with_pump and params.gamma_p > 0:
        ops.append(math.sqrt(params.gamma_p) * SIGMA1_PLUS)
        ops.append(math.sqrt(params.gamma_p) * SIGMA2_PLUS)
    return [op for op in ops if np.any(op)]


def build_liouvillian(params: SystemParams, with_pump: bool = False) -> np.ndarray:
    """16x16 generator of the two-emitter master equation.

    Collective waveguide channel with weight beta, individual radiative loss
    with weight 1 - beta, pure dephasing on each emitter, optional
    nonradiative decay and (if ``with_pump``) incoherent pumping.
    """
    liouv = commutator_superop(build_hamiltonian(params.delta))
    for op in jump_operators(params, with_pump=with_pump):
        liouv = liouv + dissipator(op)
    return liouv


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a 4x4 matrix into a 16-vector."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def devectorize(vec: np.ndarray, check: bool = True) -> np.ndarray:
    """Inverse of :func:`vectorize`; warns if the result is not Hermitian to 1e-8."""
    vec = np.asarray(vec, dtype=complex)
    n = int(round(math.sqrt(vec.size)))
    rho = vec.reshape(n, n, order="F")
    if check and np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        warnings.warn("devectorized matrix is not Hermitian beyond 1e-8", RuntimeWarning, stacklevel=2)
    return rho


def trace_functional(n: int = DIM) -> np.ndarray:
    """Row vector t with t @ vec(rho) = Tr(rho)."""
    return vectorize(np.eye(n)).conj()


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """Tr(op @ rho) without forming the product."""
    return complex(np.sum(op.T * rho))


def check_density(rho: np.ndarray, herm_tol: float = 1e-10, trace_tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
    """Raise :class:`InvariantError` unless rho is a valid density operator."""
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise InvariantError(f"density operator not Hermitian: max|rho - rho^+| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise InvariantError(f"density operator trace {tr.real:.12f}{tr.imag:+.2e}j differs from 1")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if low < -psd_tol:
        raise InvariantError(f"density operator not positive: smallest eigenvalue {low:.3e}")
