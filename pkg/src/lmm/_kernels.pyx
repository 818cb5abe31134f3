# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``lmm._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    ITERATION_LIMIT = 1
    UNBOUNDED = 2


def falling_factorial_sums(p, double n, int K):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t i, size = pv.shape[0]
    cdef int l
    cdef double prod
    out_arr = np.zeros(K + 1)
    cdef double[::1] out = out_arr
    with nogil:
        out[0] = <double>size
        for i in range(size):
            prod = 1.0
            for l in range(1, K + 1):
                prod = prod * (pv[i] - (l - 1) / n)
                out[l] += prod
    return out_arr


def phase1_simplex(A, b, Py_ssize_t max_iter, double tol=1e-9):
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = Av.shape[0], N = Av.shape[1]
    cdef Py_ssize_t ncol = N + m + 1, last = N + m
    T_arr = np.zeros((m + 1, ncol))
    cdef double[:, ::1] T = T_arr
    basis_arr = np.arange(N, N + m, dtype=np.intp)
    cdef Py_ssize_t[::1] basis = basis_arr
    cdef Py_ssize_t i, j, e, r, it = 0
    cdef int status = OPTIMAL
    cdef double piv, f, ratio, rmin, s

    with nogil:
        for i in range(m):
            for j in range(N):
                T[i, j] = Av[i, j]
            T[i, N + i] = 1.0
            T[i, last] = bv[i]
        for j in range(N):
            s = 0.0
            for i in range(m):
                s = s + Av[i, j]
            T[m, j] = -s
        s = 0.0
        for i in range(m):
            s = s + bv[i]
        T[m, last] = -s

        while True:
            e = -1
            for j in range(last):
                if T[m, j] < -tol:
                    e = j
                    break
            if e < 0:
                status = OPTIMAL
                break
            if it >= max_iter:
                status = ITERATION_LIMIT
                break
            rmin = -1.0
            for i in range(m):
                if T[i, e] > tol:
                    ratio = T[i, last] / T[i, e]
                    if rmin < 0 or ratio < rmin:
                        rmin = ratio
            if rmin < 0:
                status = UNBOUNDED
                break
            r = -1
            for i in range(m):
                if T[i, e] > tol:
                    ratio = T[i, last] / T[i, e]
                    if ratio <= rmin + 1e-12 * (rmin if rmin > 1.0 else 1.0):
                        if r < 0 or basis[i] < basis[r]:
                            r = i

            piv = T[r, e]
            for j in range(ncol):
                T[r, j] = T[r, j] / piv
            for i in range(m + 1):
                if i == r:
                    continue
                f = T[i, e]
                if f != 0.0:
                    for j in range(ncol):
                        T[i, j] = T[i, j] - f * T[r, j]
            for i in range(m):
                if T[i, last] < 0.0:
                    T[i, last] = 0.0
            basis[r] = e
            it += 1

    x = np.zeros(N + m)
    for i in range(m):
        x[basis[i]] = T[i, last]
    return x[:N], float(x[N:].sum()), int(it), int(status)
