# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport cython


def intensities(const double complex[:, ::1] A, const double complex[::1] x):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], i, j
    cdef double wr, wi, ar, ai, xr, xi
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            wr = 0.0
            wi = 0.0
            for j in range(n):
                ar = A[i, j].real
                ai = A[i, j].imag
                xr = x[j].real
                xi = x[j].imag
                # conj(a) * x
                wr = wr + ar * xr + ai * xi
                wi = wi + ar * xi - ai * xr
            o[i] = wr * wr + wi * wi
    return out


def quartic_loss(const double complex[:, ::1] A, const double complex[::1] x,
                 const double[::1] y):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], i, j
    cdef double wr, wi, ar, ai, xr, xi, r, acc = 0.0
    with nogil:
        for i in range(m):
            wr = 0.0
            wi = 0.0
            for j in range(n):
                ar = A[i, j].real
                ai = A[i, j].imag
                xr = x[j].real
                xi = x[j].imag
                wr = wr + ar * xr + ai * xi
                wi = wi + ar * xi - ai * xr
            r = wr * wr + wi * wi - y[i]
            acc = acc + r * r
    return acc


def quartic_loss_grad(const double complex[:, ::1] A, const double complex[::1] x,
                      const double[::1] y):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], i, j
    cdef double wr, wi, ar, ai, xr, xi, r, acc = 0.0, cr, ci
    grad = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] g = grad
    cdef double[::1] gr = np.zeros(n)
    cdef double[::1] gi = np.zeros(n)
    with nogil:
        for i in range(m):
            wr = 0.0
            wi = 0.0
            for j in range(n):
                ar = A[i, j].real
                ai = A[i, j].imag
                xr = x[j].real
                xi = x[j].imag
                wr = wr + ar * xr + ai * xi
                wi = wi + ar * xi - ai * xr
            r = wr * wr + wi * wi - y[i]
            acc = acc + r * r
            # 4 r (a w)
            cr = 4.0 * r * wr
            ci = 4.0 * r * wi
            for j in range(n):
                ar = A[i, j].real
                ai = A[i, j].imag
                gr[j] = gr[j] + ar * cr - ai * ci
                gi[j] = gi[j] + ar * ci + ai * cr
        for j in range(n):
            g[j] = gr[j] + 1j * gi[j]
    return acc, grad


def lifted_lowrank(const double complex[:, ::1] A, const double complex[:, ::1] H,
                   const double[::1] signs):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], s = H.shape[1], i, j, l
    cdef double wr, wi, ar, ai, hr, hi, acc
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            acc = 0.0
            for l in range(s):
                wr = 0.0
                wi = 0.0
                for j in range(n):
                    ar = A[i, j].real
                    ai = A[i, j].imag
                    hr = H[j, l].real
                    hi = H[j, l].imag
                    wr = wr + ar * hr + ai * hi
                    wi = wi + ar * hi - ai * hr
                acc = acc + signs[l] * (wr * wr + wi * wi)
            o[i] = acc
    return out
