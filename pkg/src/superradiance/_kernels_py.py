"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""

import numpy as np


def euler_integrate(heff, idx, coef, rho0, dt, checkpoints):
    heff = np.asarray(heff, dtype=complex)
    heff_dag = heff.conj().T
    idx = np.asarray(idx)
    coef = np.asarray(coef, dtype=complex)
    rho = np.array(rho0, dtype=complex)
    out = np.empty((len(checkpoints), 4, 4), dtype=complex)
    rows, cols, src_r, src_c = idx.T if len(idx) else (np.empty(0, int),) * 4
    step = 0
    for c, target in enumerate(checkpoints):
        while step < target:
            deriv = -1j * (heff @ rho - rho @ heff_dag)
            np.add.at(deriv, (rows, cols), coef * rho[src_r, src_c])
            rho = rho + dt * deriv
            step += 1
        out[c] = rho
    return out


def spectral_sum(weights, eigenvalues, times):
    return np.exp(np.outer(np.asarray(times, dtype=float), eigenvalues)) @ np.asarray(weights, dtype=complex)
