# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics match ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def tail_hits(const double[::1] R, const double[:, ::1] U, const double[:, ::1] A, T):
    cdef const double[:, ::1] Tm = np.ascontiguousarray(np.atleast_2d(T), dtype=np.float64)
    cdef Py_ssize_t n = R.shape[0], k = U.shape[1], m = Tm.shape[0]
    cdef Py_ssize_t s, i, j, e
    cdef double acc
    cdef bint ok
    out = np.zeros(m, dtype=np.int64)
    cdef long long[::1] hits = out
    cdef double[::1] x = np.empty(k)
    for s in range(n):
        for i in range(k):
            acc = 0.0
            for j in range(k):
                acc += A[j, i] * U[s, j]
            x[i] = R[s] * acc
        for e in range(m):
            ok = True
            for i in range(k):
                if not x[i] > Tm[e, i]:
                    ok = False
                    break
            if ok:
                hits[e] += 1
    return out


cdef double _quad(const double[:, ::1] P, double[::1] x, Py_ssize_t k) nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, row
    for i in range(k):
        row = 0.0
        for j in range(k):
            row += P[i, j] * x[j]
        acc += x[i] * row
    return acc


cdef void _project_step(const double[:, ::1] P, const double[::1] b, const double[::1] src, double step,
                        double[::1] dst, Py_ssize_t k) nogil:
    cdef Py_ssize_t i, j
    cdef double g, v
    for i in range(k):
        g = 0.0
        for j in range(k):
            g += P[i, j] * src[j]
        v = src[i] - step * 2.0 * g
        dst[i] = v if v > b[i] else b[i]


def pgd_box_qp(P, b, X0, long max_iter, double tol, double lipschitz):
    cdef const double[:, ::1] Pm = np.ascontiguousarray(P, dtype=np.float64)
    cdef const double[::1] bm = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[:, ::1] X0m = np.ascontiguousarray(np.atleast_2d(X0), dtype=np.float64)
    cdef Py_ssize_t n = X0m.shape[0], k = X0m.shape[1]
    Xout = np.empty((n, k))
    values = np.empty(n)
    conv = np.zeros(n, dtype=np.uint8)
    cdef double[:, ::1] Xo = Xout
    cdef double[::1] vals = values
    cdef unsigned char[::1] cv = conv
    cdef double[::1] x = np.empty(k)
    cdef double[::1] y = np.empty(k)
    cdef double[::1] xn = np.empty(k)
    cdef double[::1] pg = np.empty(k)
    cdef double step = 1.0 / lipschitz
    cdef double t, tn, f, fn, beta, worst, xmax
    cdef Py_ssize_t s, i
    cdef long it
    for s in range(n):
        for i in range(k):
            x[i] = X0m[s, i] if X0m[s, i] > bm[i] else bm[i]
            y[i] = x[i]
        t = 1.0
        f = _quad(Pm, x, k)
        for it in range(max_iter):
            _project_step(Pm, bm, y, step, xn, k)
            fn = _quad(Pm, xn, k)
            if fn > f:
                t = 1.0
                _project_step(Pm, bm, x, step, xn, k)
                fn = _quad(Pm, xn, k)
            tn = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / tn
            for i in range(k):
                y[i] = xn[i] + beta * (xn[i] - x[i])
                x[i] = xn[i]
            t = tn
            f = fn
            _project_step(Pm, bm, x, step, pg, k)
            worst = 0.0
            xmax = 0.0
            for i in range(k):
                if fabs(pg[i] - x[i]) > worst:
                    worst = fabs(pg[i] - x[i])
                if fabs(x[i]) > xmax:
                    xmax = fabs(x[i])
            if worst <= tol * (1.0 + xmax):
                cv[s] = 1
                break
        for i in range(k):
            Xo[s, i] = x[i]
        vals[s] = f
    return Xout, values, conv.astype(bool)
