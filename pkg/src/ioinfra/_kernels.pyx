# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for RAS balancing and pairwise varimax sweeps.

Signatures mirror :mod:`ioinfra._kernels_py` exactly; arrays are updated
in place.
"""

from libc.math cimport fabs, atan2, cos, sin

BACKEND = "cython"


def ras_sweeps(const double[:, ::1] M, const double[::1] u, const double[::1] v,
               double[::1] r, double[::1] s, double[::1] history,
               double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t m = M.shape[0], n = M.shape[1]
    cdef Py_ssize_t i, j, it
    cdef double acc, res, d
    cdef double[::1] colacc
    import numpy as np
    colacc = np.zeros(n)
    res = 0.0
    for it in range(1, max_iter + 1):
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += M[i, j] * s[j]
            r[i] = u[i] / acc if acc > 0.0 else 0.0
        for j in range(n):
            colacc[j] = 0.0
        for i in range(m):
            for j in range(n):
                colacc[j] += M[i, j] * r[i]
        for j in range(n):
            s[j] = v[j] / colacc[j] if colacc[j] > 0.0 else 0.0
        res = 0.0
        for j in range(n):
            colacc[j] = 0.0
        for i in range(m):
            acc = 0.0
            for j in range(n):
                d = r[i] * M[i, j] * s[j]
                acc += d
                colacc[j] += d
            d = fabs(acc - u[i]) / (u[i] if u[i] > 1.0 else 1.0)
            if d > res:
                res = d
        for j in range(n):
            d = fabs(colacc[j] - v[j]) / (v[j] if v[j] > 1.0 else 1.0)
            if d > res:
                res = d
        history[it - 1] = res
        if res <= tol:
            return it, res
    return max_iter, res


cdef double _criterion(double[:, ::1] B):
    cdef Py_ssize_t p = B.shape[0], k = B.shape[1]
    cdef Py_ssize_t i, j
    cdef double s2, s4, b2, total = 0.0
    for j in range(k):
        s2 = 0.0
        s4 = 0.0
        for i in range(p):
            b2 = B[i, j] * B[i, j]
            s2 += b2
            s4 += b2 * b2
        total += (p * s4 - s2 * s2)
    return total / (<double>p * p)


def varimax_criterion(double[:, ::1] B):
    return _criterion(B)


def varimax_sweeps(double[:, ::1] B, double[:, ::1] T, double tol, Py_ssize_t max_sweeps):
    cdef Py_ssize_t p = B.shape[0], k = B.shape[1]
    cdef Py_ssize_t a, b, i, sweep
    cdef double x, y, uu, vv, A, Bs, C, D, num, den, phi, c, sn, prev, cur
    prev = _criterion(B)
    for sweep in range(1, max_sweeps + 1):
        for a in range(k - 1):
            for b in range(a + 1, k):
                A = 0.0
                Bs = 0.0
                C = 0.0
                D = 0.0
                for i in range(p):
                    x = B[i, a]
                    y = B[i, b]
                    uu = x * x - y * y
                    vv = 2.0 * x * y
                    A += uu
                    Bs += vv
                    C += uu * uu - vv * vv
                    D += 2.0 * uu * vv
                num = D - 2.0 * A * Bs / p
                den = C - (A * A - Bs * Bs) / p
                if fabs(num) < 1e-15 and den >= 0.0:
                    continue
                phi = 0.25 * atan2(num, den)
                c = cos(phi)
                sn = sin(phi)
                for i in range(p):
                    x = B[i, a]
                    y = B[i, b]
                    B[i, a] = c * x + sn * y
                    B[i, b] = -sn * x + c * y
                for i in range(k):
                    x = T[i, a]
                    y = T[i, b]
                    T[i, a] = c * x + sn * y
                    T[i, b] = -sn * x + c * y
        cur = _criterion(B)
        if cur - prev < tol:
            return sweep, cur
        prev = cur
    return max_sweeps, prev
