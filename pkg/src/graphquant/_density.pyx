# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled angle-Jacobian determinant; same contract as _density_py.jacobian_det."""
import numpy as np
from libc.math cimport fabs
from libc.stdlib cimport malloc, free


cdef inline void _partials(double a, double b, double c, double d, double* out) noexcept nogil:
    # p = a+ib, q = c+id; u = q-p, v = q-conj(p)
    cdef double ur = c - a, ui = d - b, vr = c - a, vi = d + b
    cdef double nu = ur * ur + ui * ui, nv = vr * vr + vi * vi
    # 1/u = (ur - i ui)/nu
    cdef double iur = ur / nu, iui = -ui / nu, ivr = vr / nv, ivi = -vi / nv
    out[0] = ivi - iui          # d/da: Im(1/v - 1/u)
    out[1] = -(iur + ivr)       # d/db: Im(-i(1/u + 1/v))
    out[2] = iui - ivi          # d/dc: Im(1/u - 1/v)
    out[3] = iur - ivr          # d/dd: Im(i(1/u - 1/v))


cdef double _det(double* A, int n) noexcept nogil:
    cdef int i, j, k, piv
    cdef double det = 1.0, best, f, tmp
    for k in range(n):
        piv = k
        best = fabs(A[k * n + k])
        for i in range(k + 1, n):
            if fabs(A[i * n + k]) > best:
                best = fabs(A[i * n + k])
                piv = i
        if best == 0.0:
            return 0.0
        if piv != k:
            det = -det
            for j in range(n):
                tmp = A[k * n + j]
                A[k * n + j] = A[piv * n + j]
                A[piv * n + j] = tmp
        det *= A[k * n + k]
        for i in range(k + 1, n):
            f = A[i * n + k] / A[k * n + k]
            for j in range(k + 1, n):
                A[i * n + j] -= f * A[k * n + j]
    return det


def jacobian_det(double[:, ::1] zx, double[:, ::1] zy, double[:, ::1] t,
                 long[::1] src, long[::1] tgt, long[::1] colx, long[::1] coly, long[::1] colt):
    cdef Py_ssize_t N = zx.shape[0], e = src.shape[0], row, k
    cdef long s, r, c
    cdef double part[4]
    out = np.ones(N)
    cdef double[::1] res = out
    if e == 0:
        return out
    cdef double* A = <double*> malloc(e * e * sizeof(double))
    if A == NULL:
        raise MemoryError()
    try:
        with nogil:
            for row in range(N):
                for k in range(e * e):
                    A[k] = 0.0
                for k in range(e):
                    s = src[k] - 1
                    if tgt[k] > 0:
                        r = tgt[k] - 1
                        _partials(zx[row, s], zy[row, s], zx[row, r], zy[row, r], part)
                        if colx[r] >= 0:
                            A[k * e + colx[r]] += part[2]
                        if coly[r] >= 0:
                            A[k * e + coly[r]] += part[3]
                    else:
                        c = -tgt[k] - 1
                        _partials(zx[row, s], zy[row, s], t[row, c], 0.0, part)
                        if colt[c] >= 0:
                            A[k * e + colt[c]] += part[2]
                    if colx[s] >= 0:
                        A[k * e + colx[s]] += part[0]
                    if coly[s] >= 0:
                        A[k * e + coly[s]] += part[1]
                res[row] = _det(A, <int> e)
    finally:
        free(A)
    return out
