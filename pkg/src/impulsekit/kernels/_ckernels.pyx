# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the feature kernels in ``pykernels``.

Same contracts: validated float64 inputs, millisecond timestamps,
units/second speeds. Kept free of Python object work inside the loops.
"""

from libc.math cimport sqrt

BACKEND = "cython"


def path_length(double[::1] x, double[::1] y):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double total = 0.0, dx, dy
    for i in range(n - 1):
        dx = x[i + 1] - x[i]
        dy = y[i + 1] - y[i]
        total += sqrt(dx * dx + dy * dy)
    return total


def segment_speeds(double[::1] t, double[::1] x, double[::1] y):
    import numpy as np
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] v = out
    cdef double dx, dy
    for i in range(n - 1):
        dx = x[i + 1] - x[i]
        dy = y[i + 1] - y[i]
        v[i] = 1000.0 * sqrt(dx * dx + dy * dy) / (t[i + 1] - t[i])
    return out


def max_segment_speed(double[::1] t, double[::1] x, double[::1] y):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double best = -1.0, dx, dy, v
    for i in range(n - 1):
        dx = x[i + 1] - x[i]
        dy = y[i + 1] - y[i]
        v = 1000.0 * sqrt(dx * dx + dy * dy) / (t[i + 1] - t[i])
        if v > best:
            best = v
    return best


def max_accel(double[::1] t, double[::1] x, double[::1] y, bint time_normalized):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double dx, dy, v_prev, v_next, a
    cdef double best = 0.0
    cdef bint first = True
    dx = x[1] - x[0]
    dy = y[1] - y[0]
    v_prev = 1000.0 * sqrt(dx * dx + dy * dy) / (t[1] - t[0])
    for i in range(1, n - 1):
        dx = x[i + 1] - x[i]
        dy = y[i + 1] - y[i]
        v_next = 1000.0 * sqrt(dx * dx + dy * dy) / (t[i + 1] - t[i])
        a = v_next - v_prev
        if time_normalized:
            a = a / ((t[i + 1] - t[i - 1]) / 2000.0)
        if first or a > best:
            best = a
            first = False
        v_prev = v_next
    return best


def chord_auc(double[::1] x, double[::1] y,
              double sx, double sy, double ex, double ey):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double ux = ex - sx, uy = ey - sy
    cdef double norm = sqrt(ux * ux + uy * uy)
    cdef double rx, ry, s_prev, d_prev, s_cur, d_cur
    cdef double total = 0.0
    ux /= norm
    uy /= norm
    rx = x[0] - sx
    ry = y[0] - sy
    s_prev = rx * ux + ry * uy
    d_prev = -rx * uy + ry * ux
    for i in range(1, n):
        rx = x[i] - sx
        ry = y[i] - sy
        s_cur = rx * ux + ry * uy
        d_cur = -rx * uy + ry * ux
        total += 0.5 * (d_prev + d_cur) * (s_cur - s_prev)
        s_prev = s_cur
        d_prev = d_cur
    return total


def distance_after(double[::1] t, double[::1] x, double[::1] y, double onset):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double total = 0.0, dx, dy, frac
    for i in range(n - 1):
        if t[i + 1] <= onset:
            continue
        dx = x[i + 1] - x[i]
        dy = y[i + 1] - y[i]
        frac = (t[i + 1] - onset) / (t[i + 1] - t[i])
        if frac > 1.0:
            frac = 1.0
        total += frac * sqrt(dx * dx + dy * dy)
    return total
