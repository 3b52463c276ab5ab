# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise kernels for the piecewise-cubic penalty.

Hot path of the solver: one fused pass per backtracking trial computing
the box prox map, the penalty sum of the image, and the squared step
length.  Semantics (including branch boundaries and operation order)
mirror binopt._prox_numpy exactly; that module is the reference.
"""

from libc.math cimport sqrt

import numpy as np

ONE_SIXTH = 1.0 / 6.0

cdef double _ONE_SIXTH = 1.0 / 6.0


cdef inline double _cubic(double w) nogil:
    if w <= 0.5:
        return ((w - 3.0) * w + 3.0) * w
    return 1.0 - w * w * w


cdef inline double _prox_sel(double z, double t) nogil:
    # t is the combined prox parameter (tau * lambda).  Two-element prox
    # sets occur only at z == 1/2; the smaller candidate is returned.
    # The interior roots use the rationalized forms
    #   1 + 2(z-1)/(1 + sqrt(1+12t(z-1)))  and  2z/(1 + sqrt(1-12tz)),
    # which stay accurate as t -> 0 (the textbook (sqrt(..)-1)/(6t)
    # layout cancels catastrophically there).
    cdef double disc, w
    if t >= _ONE_SIXTH:
        return 1.0 if z > 0.5 else 0.0
    if z <= 3.0 * t:
        return 0.0
    if z <= 0.5:
        disc = 1.0 + 12.0 * t * (z - 1.0)
        if disc < 0.0:
            disc = 0.0
        w = 1.0 + 2.0 * (z - 1.0) / (1.0 + sqrt(disc))
    elif z < 1.0 - 3.0 * t:
        disc = 1.0 - 12.0 * t * z
        if disc < 0.0:
            disc = 0.0
        w = 2.0 * z / (1.0 + sqrt(disc))
    else:
        return 1.0
    if w < 0.0:
        w = 0.0
    elif w > 1.0:
        w = 1.0
    return w


def penalty_sum(double[::1] x):
    """Sum of the scalar cubic penalty over all components."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            acc += _cubic(x[i])
    return acc


def prox_select(double[::1] z, double t):
    """Componentwise selected prox of the cubic penalty over [0, 1]."""
    if t <= 0.0:
        raise ValueError("prox parameter must be positive")
    out = np.empty(z.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = z.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _prox_sel(z[i], t)
    return out


def prox_step(double[::1] z, double t, double[::1] x):
    """Fused prox + penalty + squared distance to ``x``.

    Returns ``(x_next, penalty, sq_dist)`` where ``x_next`` is the
    componentwise selected prox of ``z``, ``penalty`` the cubic penalty
    sum of ``x_next`` and ``sq_dist`` the squared euclidean distance
    between ``x_next`` and ``x``.
    """
    if t <= 0.0:
        raise ValueError("prox parameter must be positive")
    if x.shape[0] != z.shape[0]:
        raise ValueError("length mismatch between z and x")
    out = np.empty(z.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double pen = 0.0, sqd = 0.0, w, d
    with nogil:
        for i in range(n):
            w = _prox_sel(z[i], t)
            ov[i] = w
            pen += _cubic(w)
            d = w - x[i]
            sqd += d * d
    return out, pen, sqd
