# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused power sums and double-phase densities.

Same contract as the numpy fallback in ``_pycore``: reductions run in
lexicographic order with Neumaier compensation, power-sum terms are
nonnegative and overflow short-circuits to +inf.
"""

from libc.math cimport fabs, isfinite, pow, INFINITY

import numpy as np

BACKEND_NAME = "compiled"


cdef inline double[::1] _flat(object x):
    return np.ascontiguousarray(x, dtype=np.float64).ravel()


cdef double _neumaier(double[::1] x) noexcept:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    for i in range(n):
        v = x[i]
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def comp_sum(object xs):
    cdef double[::1] x = _flat(xs)
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s
    for i in range(n):
        if not isfinite(x[i]):
            # plain accumulation once nonfinite values appear
            s = 0.0
            for i in range(n):
                s += x[i]
            return s
    return _neumaier(x)


def dot(object xs, object ys):
    cdef double[::1] x = _flat(xs)
    cdef double[::1] y = _flat(ys)
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    if y.shape[0] != n:
        raise ValueError("dot: length mismatch")
    for i in range(n):
        v = x[i] * y[i]
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def abs_power_sum(object absus, object pexps):
    cdef double[::1] absu = _flat(absus)
    cdef double[::1] p = _flat(pexps)
    cdef Py_ssize_t i, n = absu.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    for i in range(n):
        v = pow(absu[i], p[i])
        if not isfinite(v):
            return INFINITY
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def abs_power_sum_weighted(object absus, object pexps, object ws):
    cdef double[::1] absu = _flat(absus)
    cdef double[::1] p = _flat(pexps)
    cdef double[::1] w = _flat(ws)
    cdef Py_ssize_t i, n = absu.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    for i in range(n):
        if w[i] == 0.0:
            continue
        v = w[i] * pow(absu[i], p[i])
        if not isfinite(v):
            return INFINITY
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def scaled_abs_power_sum(object absus, object pexps, double inv_scale):
    cdef double[::1] absu = _flat(absus)
    cdef double[::1] p = _flat(pexps)
    cdef Py_ssize_t i, n = absu.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    for i in range(n):
        v = pow(absu[i] * inv_scale, p[i])
        if not isfinite(v):
            return INFINITY
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def scaled_abs_power_sum_weighted(object absus, object pexps, object ws,
                                  double inv_scale):
    cdef double[::1] absu = _flat(absus)
    cdef double[::1] p = _flat(pexps)
    cdef double[::1] w = _flat(ws)
    cdef Py_ssize_t i, n = absu.shape[0]
    cdef double s = 0.0, c = 0.0, t, v
    for i in range(n):
        if w[i] == 0.0:
            continue
        v = w[i] * pow(absu[i] * inv_scale, p[i])
        if not isfinite(v):
            return INFINITY
        t = s + v
        if fabs(s) >= fabs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def abs_power(object absus, object pexps):
    cdef double[::1] absu = _flat(absus)
    cdef double[::1] p = _flat(pexps)
    cdef Py_ssize_t i, n = absu.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = pow(absu[i], p[i])
    return out_arr


def signed_power(object us, object es):
    cdef double[::1] u = _flat(us)
    cdef double[::1] e = _flat(es)
    cdef Py_ssize_t i, n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double v
    for i in range(n):
        v = u[i]
        if v > 0.0:
            out[i] = pow(v, e[i] - 1.0)
        elif v < 0.0:
            out[i] = -pow(-v, e[i] - 1.0)
        else:
            out[i] = 0.0
    return out_arr


def power_density(object us, object es):
    cdef double[::1] u = _flat(us)
    cdef double[::1] e = _flat(es)
    cdef Py_ssize_t i, n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = pow(fabs(u[i]), e[i]) / e[i]
    return out_arr


def typical_potential(object gmags, object ps, object qs):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if g[i] <= 1.0:
            out[i] = pow(g[i], q[i]) / q[i]
        else:
            out[i] = pow(g[i], p[i]) / p[i] + 1.0 / q[i] - 1.0 / p[i]
    return out_arr


def typical_flux_factor(object gmags, object ps, object qs):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if g[i] == 0.0:
            out[i] = 0.0
        elif g[i] <= 1.0:
            out[i] = pow(g[i], q[i] - 2.0)
        else:
            out[i] = pow(g[i], p[i] - 2.0)
    return out_arr


def weighted_potential(object gmags, object ps, object qs, object as_, object bs):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef double[::1] a = _flat(as_)
    cdef double[::1] b = _flat(bs)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if a[i] != 0.0:
            out[i] += a[i] / p[i] * pow(g[i], p[i])
        if b[i] != 0.0:
            out[i] += b[i] / q[i] * pow(g[i], q[i])
    return out_arr


def weighted_flux_factor(object gmags, object ps, object qs, object as_, object bs):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef double[::1] a = _flat(as_)
    cdef double[::1] b = _flat(bs)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if g[i] <= 0.0:
            continue
        if a[i] != 0.0:
            out[i] += a[i] * pow(g[i], p[i] - 2.0)
        if b[i] != 0.0:
            out[i] += b[i] * pow(g[i], q[i] - 2.0)
    return out_arr


def bcm_potential(object gmags, object ps, object qs, object as_):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef double[::1] a = _flat(as_)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = pow(g[i], p[i])
        if a[i] != 0.0:
            out[i] += a[i] * pow(g[i], q[i])
    return out_arr


def bcm_flux_factor(object gmags, object ps, object qs, object as_):
    cdef double[::1] g = _flat(gmags)
    cdef double[::1] p = _flat(ps)
    cdef double[::1] q = _flat(qs)
    cdef double[::1] a = _flat(as_)
    cdef Py_ssize_t i, n = g.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if g[i] <= 0.0:
            continue
        out[i] = p[i] * pow(g[i], p[i] - 2.0)
        if a[i] != 0.0:
            out[i] += a[i] * q[i] * pow(g[i], q[i] - 2.0)
    return out_arr
