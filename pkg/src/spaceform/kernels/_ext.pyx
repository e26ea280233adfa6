# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the batched chart kernels (see ``_pure``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, cosh, sinh, atan2, asinh, fabs

cnp.import_array()


cdef inline void _chart_point(double c, double k, const double[::1] p0, const double[:, ::1] E,
                              const double[:, ::1] A, Py_ssize_t row, double[::1] out) noexcept nogil:
    cdef Py_ssize_t N = p0.shape[0]
    cdef Py_ssize_t j = E.shape[1]
    cdef Py_ssize_t a, b
    cdef double s = 0.0, ca, scale, v
    for b in range(j):
        s += A[row, b] * A[row, b]
    s = sqrt(s)
    if c == 0.0:
        ca = 1.0
        scale = 1.0
    elif c > 0.0:
        ca = cos(k * s)
        scale = sin(k * s) / (k * s) if s > 0.0 else 1.0
    else:
        ca = cosh(k * s)
        scale = sinh(k * s) / (k * s) if s > 0.0 else 1.0
    for a in range(N):
        v = 0.0
        for b in range(j):
            v += E[a, b] * A[row, b]
        out[a] = ca * p0[a] + scale * v


def chart_points(double c, p0, E, A):
    cdef const double[::1] p0v = np.ascontiguousarray(p0, dtype=np.float64)
    cdef const double[:, ::1] Ev = np.ascontiguousarray(np.asarray(E, dtype=np.float64).reshape(p0v.shape[0], -1))
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype=np.float64)))
    cdef Py_ssize_t K = Av.shape[0], N = p0v.shape[0], r
    out = np.empty((K, N), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef double k = sqrt(fabs(c))
    with nogil:
        for r in range(K):
            _chart_point(c, k, p0v, Ev, Av, r, ov[r])
    return out


def chart_log_components(double c, q, p0, E, T, A):
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] p0v = np.ascontiguousarray(p0, dtype=np.float64)
    cdef Py_ssize_t N = qv.shape[0]
    cdef const double[:, ::1] Ev = np.ascontiguousarray(np.asarray(E, dtype=np.float64).reshape(N, -1))
    cdef const double[:, ::1] Tv = np.ascontiguousarray(np.asarray(T, dtype=np.float64).reshape(N, -1))
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype=np.float64)))
    cdef Py_ssize_t K = Av.shape[0], m = Tv.shape[1], r, a, i
    comps = np.empty((K, m), dtype=np.float64)
    dist = np.empty(K, dtype=np.float64)
    cdef double[:, ::1] cv = comps
    cdef double[::1] dv = dist
    cdef double[::1] w = np.empty(N, dtype=np.float64)
    cdef double[::1] u = np.empty(N, dtype=np.float64)
    cdef double k = sqrt(fabs(c))
    cdef double qw, nu, g, sgn
    with nogil:
        for r in range(K):
            _chart_point(c, k, p0v, Ev, Av, r, w)
            if c == 0.0:
                nu = 0.0
                for a in range(N):
                    u[a] = w[a] - qv[a]
                    nu += u[a] * u[a]
                nu = sqrt(nu)
                dv[r] = nu
            else:
                qw = 0.0
                for a in range(N):
                    qw += w[a] * qv[a]
                if c < 0.0:
                    qw -= 2.0 * w[0] * qv[0]
                nu = 0.0
                for a in range(N):
                    u[a] = w[a] - c * qw * qv[a]
                    nu += u[a] * u[a]
                if c < 0.0:
                    nu -= 2.0 * u[0] * u[0]
                nu = sqrt(nu) if nu > 0.0 else 0.0
                if c > 0.0:
                    dv[r] = atan2(k * nu, c * qw) / k
                else:
                    dv[r] = asinh(k * nu) / k
            for i in range(m):
                if nu > 0.0:
                    g = 0.0
                    for a in range(N):
                        g += u[a] * Tv[a, i]
                    if c < 0.0:
                        g -= 2.0 * u[0] * Tv[0, i]
                    cv[r, i] = g / nu
                else:
                    cv[r, i] = 0.0
    return comps, dist
