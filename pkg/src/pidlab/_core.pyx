# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror :mod:`pidlab._fallback` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef inline void _affine_rhs(const double[:, ::1] a, const double[:, ::1] c,
                             const double[:, ::1] x, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], d = x.shape[1], i, j, k
    cdef double aij
    for i in range(n):
        for k in range(d):
            out[i, k] = c[i, k]
        for j in range(n):
            aij = a[i, j]
            if aij != 0.0:
                for k in range(d):
                    out[i, k] += aij * x[j, k]


def rk4_affine(double[:, ::1] a, double[:, ::1] c, double[:, ::1] x0,
               double dt, Py_ssize_t n_steps, Py_ssize_t record_every,
               double blowup):
    cdef Py_ssize_t n = x0.shape[0], d = x0.shape[1]
    cdef Py_ssize_t n_rec = n_steps // record_every + 1
    if n_steps % record_every:
        n_rec += 1
    records_arr = np.empty((n_rec, n, d), dtype=np.float64)
    cdef double[:, :, ::1] records = records_arr
    cdef double[:, ::1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef double[:, ::1] k1 = np.empty((n, d)), k2 = np.empty((n, d))
    cdef double[:, ::1] k3 = np.empty((n, d)), k4 = np.empty((n, d))
    cdef double[:, ::1] tmp = np.empty((n, d))
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0, v
    cdef Py_ssize_t step, i, k, r = 1
    cdef Py_ssize_t fail = -1
    records[0, :, :] = x
    with nogil:
        for step in range(1, n_steps + 1):
            _affine_rhs(a, c, x, k1)
            for i in range(n):
                for k in range(d):
                    tmp[i, k] = x[i, k] + h2 * k1[i, k]
            _affine_rhs(a, c, tmp, k2)
            for i in range(n):
                for k in range(d):
                    tmp[i, k] = x[i, k] + h2 * k2[i, k]
            _affine_rhs(a, c, tmp, k3)
            for i in range(n):
                for k in range(d):
                    tmp[i, k] = x[i, k] + dt * k3[i, k]
            _affine_rhs(a, c, tmp, k4)
            for i in range(n):
                for k in range(d):
                    v = x[i, k] + h6 * (k1[i, k] + 2.0 * k2[i, k] + 2.0 * k3[i, k] + k4[i, k])
                    if not isfinite(v) or fabs(v) > blowup:
                        fail = step
                    x[i, k] = v
            if fail >= 0:
                break
            if step % record_every == 0 or step == n_steps:
                records[r, :, :] = x
                r += 1
    return records_arr, fail


def perron_power(double[:, ::1] kt, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t n = kt.shape[0], i, j, it
    cdef double[::1] p = np.full(n, 1.0 / n)
    cdef double[::1] q = np.empty(n)
    cdef double s, change = 0.0
    with nogil:
        for it in range(1, max_iter + 1):
            s = 0.0
            for i in range(n):
                q[i] = 0.0
                for j in range(n):
                    q[i] += kt[i, j] * p[j]
                s += q[i]
            change = 0.0
            for i in range(n):
                q[i] /= s
                if fabs(q[i] - p[i]) > change:
                    change = fabs(q[i] - p[i])
                p[i] = q[i]
            if change < tol:
                break
    return np.asarray(p), it, change
