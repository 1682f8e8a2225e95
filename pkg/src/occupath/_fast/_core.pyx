# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the hot kernels (see ref.py for contracts)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin, sqrt

cnp.import_array()


cdef inline double _sigmoid(double f) nogil:
    if f >= 0.0:
        return 1.0 / (1.0 + exp(-f))
    cdef double e = exp(f)
    return e / (1.0 + e)


def time_features(double[::1] omega, double[::1] phase, double[::1] ts, int order):
    cdef Py_ssize_t m = omega.shape[0]
    cdef Py_ssize_t n = ts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double scale = sqrt(2.0 / m)
    cdef Py_ssize_t i, j
    cdef double t, a
    with nogil:
        for i in range(n):
            t = ts[i]
            if order == 0:
                for j in range(m):
                    o[i, j] = scale * cos(omega[j] * t + phase[j])
            elif order == 1:
                for j in range(m):
                    o[i, j] = -scale * sin(omega[j] * t + phase[j]) * omega[j]
            else:
                for j in range(m):
                    a = omega[j]
                    o[i, j] = -scale * cos(a * t + phase[j]) * a * a
    return out


def spatial_design(double[:, ::1] omega, double[::1] phase, double[:, ::1] points):
    cdef Py_ssize_t m = omega.shape[0]
    cdef Py_ssize_t d = omega.shape[1]
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double scale = sqrt(2.0 / m)
    cdef Py_ssize_t i, j, k
    cdef double acc
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = phase[j]
                for k in range(d):
                    acc += omega[j, k] * points[i, k]
                o[i, j] = scale * cos(acc)
    return out


def map_query(double[:, ::1] omega, double[::1] phase, double[::1] weights,
              double bias, double[:, ::1] points):
    cdef Py_ssize_t m = omega.shape[0]
    cdef Py_ssize_t d = omega.shape[1]
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double scale = sqrt(2.0 / m)
    cdef Py_ssize_t i, j, k
    cdef double acc, f
    with nogil:
        for i in range(n):
            f = bias
            for j in range(m):
                acc = phase[j]
                for k in range(d):
                    acc += omega[j, k] * points[i, k]
                f += scale * cos(acc) * weights[j]
            o[i] = _sigmoid(f)
    return out


def map_query_grad(double[:, ::1] omega, double[::1] phase, double[::1] weights,
                   double bias, double[:, ::1] points):
    cdef Py_ssize_t m = omega.shape[0]
    cdef Py_ssize_t d = omega.shape[1]
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] grad = np.zeros((n, d), dtype=np.float64)
    cdef double[::1] pv = p
    cdef double[:, ::1] gv = grad
    cdef double scale = sqrt(2.0 / m)
    cdef Py_ssize_t i, j, k
    cdef double acc, f, s, pp, fac
    with nogil:
        for i in range(n):
            f = bias
            for j in range(m):
                acc = phase[j]
                for k in range(d):
                    acc += omega[j, k] * points[i, k]
                f += scale * cos(acc) * weights[j]
                s = -scale * sin(acc) * weights[j]
                for k in range(d):
                    gv[i, k] += s * omega[j, k]
            pp = _sigmoid(f)
            pv[i] = pp
            fac = pp * (1.0 - pp)
            for k in range(d):
                gv[i, k] *= fac
    return p, grad


def rank1_updates(double[:, ::1] weights, double[:, ::1] grads,
                  double[:, ::1] feats, double eta):
    cdef Py_ssize_t d = weights.shape[0]
    cdef Py_ssize_t m = weights.shape[1]
    cdef Py_ssize_t b = grads.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double g
    with nogil:
        for i in range(b):
            for j in range(d):
                g = eta * grads[i, j]
                for k in range(m):
                    weights[j, k] -= g * feats[i, k]
