# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernel for product-input output entropies.

Per sample: form the product state, apply the gate, reshape to a d_a x d_b
coefficient matrix, and read the reduced-state spectrum off a one-sided
Jacobi row orthogonalization.  Interface-identical to ``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, sin, log, sqrt

cnp.import_array()

__all__ = ["product_output_entropies"]

cdef int MAX_SWEEPS = 30
cdef double ORTHO_TOL = 1e-26    # squared relative off-diagonal tolerance
cdef double EIG_FLOOR = 1e-15
cdef double LOG2 = 0.6931471805599453


cdef double _entropy_from_rows(double complex[:, ::1] x, int d_a, int d_b) noexcept:
    """One-sided Jacobi on the rows of x; returns the entropy of the squared
    row norms after orthogonalization (the reduced-state spectrum)."""
    cdef int p, q, j, sweep
    cdef double app, aqq, r2, r, phi, theta, c, s
    cdef double complex apq, u, xp, xq
    cdef double total, lam, ent
    cdef bint rotated
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for p in range(d_a - 1):
            for q in range(p + 1, d_a):
                app = 0.0
                aqq = 0.0
                apq = 0.0
                for j in range(d_b):
                    xp = x[p, j]
                    xq = x[q, j]
                    app += xp.real * xp.real + xp.imag * xp.imag
                    aqq += xq.real * xq.real + xq.imag * xq.imag
                    apq += xp * xq.conjugate()
                r2 = apq.real * apq.real + apq.imag * apq.imag
                if r2 <= ORTHO_TOL * app * aqq or r2 == 0.0:
                    continue
                rotated = True
                r = sqrt(r2)
                phi = atan2(apq.imag, apq.real)
                theta = 0.5 * atan2(2.0 * r, app - aqq)
                c = cos(theta)
                s = sin(theta)
                u = cos(phi) + 1j * sin(phi)
                for j in range(d_b):
                    xp = x[p, j]
                    xq = u * x[q, j]
                    x[p, j] = c * xp + s * xq
                    x[q, j] = -s * xp + c * xq
        if not rotated:
            break
    total = 0.0
    ent = 0.0
    for p in range(d_a):
        lam = 0.0
        for j in range(d_b):
            xp = x[p, j]
            lam += xp.real * xp.real + xp.imag * xp.imag
        total += lam
    for p in range(d_a):
        lam = 0.0
        for j in range(d_b):
            xp = x[p, j]
            lam += xp.real * xp.real + xp.imag * xp.imag
        lam /= total
        if lam > EIG_FLOOR:
            ent -= lam * log(lam) / LOG2
    return ent


def product_output_entropies(u, int d_a, int d_b, a_states, b_states):
    """Base-2 entanglement entropy of U(a_r (x) b_r) for each input row r.

    ``a_states`` is (n, d_a), ``b_states`` is (n, d_b), rows normalized; the
    result has shape (n,).
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] umat = np.ascontiguousarray(
        u, dtype=np.complex128
    )
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] amat = np.ascontiguousarray(
        a_states, dtype=np.complex128
    )
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] bmat = np.ascontiguousarray(
        b_states, dtype=np.complex128
    )
    cdef int n = amat.shape[0]
    cdef int d = d_a * d_b
    if umat.shape[0] != d or umat.shape[1] != d:
        raise ValueError("gate dimension does not match d_a * d_b")
    if bmat.shape[0] != n:
        raise ValueError("a_states and b_states must have the same length")
    if amat.shape[1] != d_a or bmat.shape[1] != d_b:
        raise ValueError("state dimensions do not match d_a, d_b")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] psi = np.empty(d, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x = np.empty(
        (d_a, d_b), dtype=np.complex128
    )
    cdef double complex[:, ::1] uv = umat
    cdef double complex[:, ::1] av = amat
    cdef double complex[:, ::1] bv = bmat
    cdef double complex[::1] psiv = psi
    cdef double complex[:, ::1] xv = x
    cdef double[::1] outv = out
    cdef int r, i, j, k
    cdef double complex acc
    for r in range(n):
        for i in range(d_a):
            for j in range(d_b):
                psiv[i * d_b + j] = av[r, i] * bv[r, j]
        for i in range(d_a):
            for j in range(d_b):
                acc = 0.0
                for k in range(d):
                    acc += uv[i * d_b + j, k] * psiv[k]
                xv[i, j] = acc
        outv[r] = _entropy_from_rows(xv, d_a, d_b)
    return out
