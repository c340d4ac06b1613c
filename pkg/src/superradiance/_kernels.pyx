# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Pure-Python twins live in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin

cnp.import_array()

ctypedef double complex cplx


cdef inline void _rhs(cplx[:, ::1] heff, cplx[:, ::1] heff_dag,
                      int nterm, int[:, ::1] idx, cplx[::1] coef,
                      cplx[:, ::1] rho, cplx[:, ::1] out) noexcept nogil:
    cdef int i, j, k, t
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc = acc + heff[i, k] * rho[k, j] - rho[i, k] * heff_dag[k, j]
            out[i, j] = -1j * acc
    for t in range(nterm):
        out[idx[t, 0], idx[t, 1]] = out[idx[t, 0], idx[t, 1]] + coef[t] * rho[idx[t, 2], idx[t, 3]]


def euler_integrate(cplx[:, ::1] heff, int[:, ::1] idx, cplx[::1] coef,
                    cplx[:, ::1] rho0, double dt, long[::1] checkpoints):
    """Explicit Euler steps of ``drho = -i(Heff rho - rho Heff^+) + sum L rho L^+``.

    ``idx``/``coef`` list the sandwich terms ``out[i, j] += c * rho[a, b]``.
    Returns the state after each step count in ``checkpoints`` (non-decreasing).
    """
    cdef cplx[:, ::1] heff_dag = np.ascontiguousarray(np.conj(np.asarray(heff)).T)
    cdef cplx[:, ::1] rho = np.array(rho0, dtype=complex, copy=True)
    cdef cplx[:, ::1] deriv = np.zeros((4, 4), dtype=complex)
    cdef int m = checkpoints.shape[0]
    cdef int nterm = coef.shape[0]
    out_arr = np.empty((m, 4, 4), dtype=complex)
    cdef cplx[:, :, ::1] out = out_arr
    cdef long step = 0
    cdef int c, i, j
    with nogil:
        for c in range(m):
            while step < checkpoints[c]:
                _rhs(heff, heff_dag, nterm, idx, coef, rho, deriv)
                for i in range(4):
                    for j in range(4):
                        rho[i, j] = rho[i, j] + dt * deriv[i, j]
                step += 1
            out[c, :, :] = rho
    return out_arr


def spectral_sum(cplx[::1] weights, cplx[::1] eigenvalues, double[::1] times):
    """``sum_k weights[k] * exp(eigenvalues[k] * t)`` for every t."""
    cdef int nt = times.shape[0]
    cdef int nk = weights.shape[0]
    out_arr = np.empty(nt, dtype=complex)
    cdef cplx[::1] out = out_arr
    cdef int i, k
    cdef double t, mag, ph
    cdef cplx acc
    with nogil:
        for i in range(nt):
            t = times[i]
            acc = 0
            for k in range(nk):
                mag = exp(eigenvalues[k].real * t)
                ph = eigenvalues[k].imag * t
                acc = acc + weights[k] * (mag * cos(ph) + 1j * mag * sin(ph))
            out[i] = acc
    return out_arr
