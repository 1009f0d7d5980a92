# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: modular, Luxemburg bisection, Orlicz golden section.

Mirrors ``_fallback.py`` step for step; see there for the algorithms.
"""
import numpy as np
from ._fallback import normalized

from libc.math cimport exp, expm1, fabs, log, log1p, pow, sqrt

DEF SERIES_CUTOFF = 0.1
DEF SERIES_TERMS = 18
DEF MAX_BRACKET_STEPS = 2100
DEF MAX_BISECT_STEPS = 200
DEF MAX_GOLDEN_STEPS = 400

cdef double INV_PHI = (sqrt(5.0) - 1.0) / 2.0
cdef double[SERIES_TERMS - 1] EML_COEFS
cdef double[SERIES_TERMS - 1] ENT_COEFS


cdef void _init_series():
    cdef int k
    cdef double fact = 1.0
    for k in range(2, SERIES_TERMS + 1):
        fact = 1.0
        for j in range(2, k + 1):
            fact *= j
        EML_COEFS[k - 2] = 1.0 / fact
        ENT_COEFS[k - 2] = (1.0 if k % 2 == 0 else -1.0) / (k * (k - 1.0))


_init_series()


cdef inline double _series(double* coefs, double u) noexcept nogil:
    cdef double acc = 0.0
    cdef int k
    for k in range(SERIES_TERMS - 2, -1, -1):
        acc = (acc + coefs[k]) * u
    return acc * u


cdef inline double _base(int code, double p, double u) noexcept nogil:
    if code == 0:
        return pow(u, p)
    if code == 1:
        if u < SERIES_CUTOFF:
            return _series(EML_COEFS, u)
        return expm1(u) - u
    if code == 2:
        return expm1(u * u)
    if code == 3:
        if u < SERIES_CUTOFF:
            return _series(ENT_COEFS, u)
        return (1.0 + u) * log1p(u) - u
    if code == 4:
        return pow(u, p) * log1p(u)
    return 0.0


cdef inline double _nfun(const long[:] codes, const double[:] ps, const double[:] coefs,
                         double u) noexcept nogil:
    cdef double total = 0.0
    cdef Py_ssize_t k
    for k in range(codes.shape[0]):
        total = total + coefs[k] * _base(<int>codes[k], ps[k], u)
    return total


cdef double _modular(const long[:] codes, const double[:] ps, const double[:] coefs,
                     const double[:] x, const double[:] w, double scale) noexcept nogil:
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        total = total + _nfun(codes, ps, coefs, fabs(x[i]) * scale) * w[i]
    return total


cdef double _luxemburg(const long[:] codes, const double[:] ps, const double[:] coefs,
                       const double[:] x, const double[:] w, double rtol) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double xmax = 0.0, wmax = 0.0, hi, lo, mid
    cdef int steps = 0
    for i in range(n):
        if fabs(x[i]) > xmax:
            xmax = fabs(x[i])
        if w[i] > wmax:
            wmax = w[i]
    if xmax == 0.0:
        return 0.0
    hi = xmax * n * wmax + 1.0
    while _modular(codes, ps, coefs, x, w, 1.0 / hi) > 1.0:
        hi *= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            return -1.0
    lo = 0.5 * hi
    while _modular(codes, ps, coefs, x, w, 1.0 / lo) <= 1.0:
        hi = lo
        lo *= 0.5
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            return -1.0
    for i in range(MAX_BISECT_STEPS):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _modular(codes, ps, coefs, x, w, 1.0 / mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


cdef inline double _g(const long[:] codes, const double[:] ps, const double[:] coefs,
                      const double[:] x, const double[:] w, double t) noexcept nogil:
    cdef double lam = exp(t)
    return (1.0 + _modular(codes, ps, coefs, x, w, lam)) / lam


cdef double _orlicz(const long[:] codes, const double[:] ps, const double[:] coefs,
                    const double[:] x, const double[:] w, double rtol) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double xmax = 0.0
    cdef double t_a, t_b, t_c, g_a, g_b, g_c, lo, hi, x1, x2, f1, f2, best
    cdef int steps = 0
    for i in range(n):
        if fabs(x[i]) > xmax:
            xmax = fabs(x[i])
    if xmax == 0.0:
        return 0.0
    t_b = -log(xmax)
    g_b = _g(codes, ps, coefs, x, w, t_b)
    t_c = t_b + 1.0
    g_c = _g(codes, ps, coefs, x, w, t_c)
    if g_c < g_b:
        t_a = t_b
        g_a = g_b
        t_b = t_c
        g_b = g_c
        t_c = t_b + 1.0
        g_c = _g(codes, ps, coefs, x, w, t_c)
        while g_c < g_b:
            t_a = t_b
            g_a = g_b
            t_b = t_c
            g_b = g_c
            t_c = t_b + 1.0
            g_c = _g(codes, ps, coefs, x, w, t_c)
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                return -1.0
    else:
        t_a = t_b - 1.0
        g_a = _g(codes, ps, coefs, x, w, t_a)
        while g_a < g_b:
            t_c = t_b
            g_c = g_b
            t_b = t_a
            g_b = g_a
            t_a = t_b - 1.0
            g_a = _g(codes, ps, coefs, x, w, t_a)
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                return -1.0
    lo = t_a
    hi = t_c
    best = g_b
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1 = _g(codes, ps, coefs, x, w, x1)
    f2 = _g(codes, ps, coefs, x, w, x2)
    for i in range(MAX_GOLDEN_STEPS):
        if hi - lo <= rtol:
            break
        if f1 <= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = _g(codes, ps, coefs, x, w, x1)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = _g(codes, ps, coefs, x, w, x2)
    if f1 < best:
        best = f1
    if f2 < best:
        best = f2
    return best


def _arrays(codes, ps, coefs):
    return (np.ascontiguousarray(codes, dtype=np.int_),
            np.ascontiguousarray(ps, dtype=float),
            np.ascontiguousarray(coefs, dtype=float))


def terms_eval(codes, ps, coefs, u):
    cdef const long[:] c
    cdef const double[:] p, k
    c, p, k = _arrays(codes, ps, coefs)
    u_arr = np.ascontiguousarray(u, dtype=float)
    flat = u_arr.reshape(-1)
    out = np.empty_like(flat)
    cdef double[:] o = out
    cdef const double[:] uu = flat
    cdef Py_ssize_t i
    with nogil:
        for i in range(uu.shape[0]):
            o[i] = _nfun(c, p, k, uu[i])
    return out.reshape(u_arr.shape)


def modular_terms(codes, ps, coefs, x, w, double scale=1.0):
    cdef const long[:] c
    cdef const double[:] p, k
    c, p, k = _arrays(codes, ps, coefs)
    cdef const double[:] xv = np.ascontiguousarray(x, dtype=float)
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=float)
    cdef double r
    with nogil:
        r = _modular(c, p, k, xv, wv, scale)
    return r


def luxemburg_terms(codes, ps, coefs, x, w, double rtol):
    cdef const long[:] c
    cdef const double[:] p, k
    c, p, k = _arrays(codes, ps, coefs)
    xn, xmax = normalized(np.ascontiguousarray(x, dtype=float))
    if xmax == 0.0:
        return 0.0
    cdef const double[:] xv = xn
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=float)
    cdef double r
    with nogil:
        r = _luxemburg(c, p, k, xv, wv, rtol)
    if r < 0.0:
        raise ArithmeticError("no bracket for the Luxemburg norm")
    return xmax * r


def orlicz_terms(codes, ps, coefs, x, w, double rtol):
    cdef const long[:] c
    cdef const double[:] p, k
    c, p, k = _arrays(codes, ps, coefs)
    xn, xmax = normalized(np.ascontiguousarray(x, dtype=float))
    if xmax == 0.0:
        return 0.0
    cdef const double[:] xv = xn
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=float)
    cdef double r
    with nogil:
        r = _orlicz(c, p, k, xv, wv, rtol)
    if r < 0.0:
        raise ArithmeticError("no bracket for the Orlicz norm")
    return xmax * r


def luxemburg_batch_terms(codes, ps, coefs, X, w, double rtol):
    cdef const long[:] c
    cdef const double[:] p, k
    c, p, k = _arrays(codes, ps, coefs)
    X_arr = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
    scales = np.max(np.abs(X_arr), axis=1) if X_arr.shape[1] else np.zeros(X_arr.shape[0])
    safe = np.where((scales > 0) & np.isfinite(scales), scales, 1.0)
    X_arr = np.ascontiguousarray(X_arr / safe[:, None])
    cdef const double[:, :] Xv = X_arr
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=float)
    out = np.empty(X_arr.shape[0])
    cdef double[:] o = out
    cdef Py_ssize_t r
    cdef bint failed = False
    with nogil:
        for r in range(Xv.shape[0]):
            o[r] = _luxemburg(c, p, k, Xv[r], wv, rtol)
            if o[r] < 0.0:
                failed = True
    if failed:
        raise ArithmeticError("no bracket for the Luxemburg norm")
    return out * safe
