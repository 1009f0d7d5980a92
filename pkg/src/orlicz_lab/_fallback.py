"""Pure-Python kernels.

Every N-function in the catalog is a positive combination of *terms*
``coef * B(u)``, where ``B`` is one of the base shapes below.  The term
encoding ``(codes, ps, coefs)`` is shared with the compiled kernels in
``_ckernels.pyx``; the search algorithms here are mirrored line by line
there, so both backends agree to rounding.
"""
import math

import numpy as np

POWER, EXP_MINUS_LINEAR, EXP_SQUARE, ENTROPY_LIKE, POWER_LOG = range(5)

# below this argument the closed forms cancel badly; use the Taylor series
SERIES_CUTOFF = 0.1
SERIES_TERMS = 18

_EML_COEFS = np.array([1.0 / math.factorial(k) for k in range(2, SERIES_TERMS + 1)])
_ENT_COEFS = np.array([(-1.0) ** k / (k * (k - 1)) for k in range(2, SERIES_TERMS + 1)])

MAX_BRACKET_STEPS = 2100
MAX_BISECT_STEPS = 200
MAX_GOLDEN_STEPS = 400
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _series(coefs, u):
    # sum_k coefs[k-2] * u**k, Horner form
    acc = np.zeros_like(u)
    for c in coefs[::-1]:
        acc = (acc + c) * u
    return acc * u


def base_eval(code, p, u):
    """Evaluate one base shape on a nonnegative float array."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if code == POWER:
            return u**p
        if code == EXP_MINUS_LINEAR:
            small = u < SERIES_CUTOFF
            return np.where(small, _series(_EML_COEFS, np.where(small, u, 0.0)),
                            np.expm1(u) - u)
        if code == EXP_SQUARE:
            return np.expm1(u * u)
        if code == ENTROPY_LIKE:
            small = u < SERIES_CUTOFF
            return np.where(small, _series(_ENT_COEFS, np.where(small, u, 0.0)),
                            (1.0 + u) * np.log1p(u) - u)
        if code == POWER_LOG:
            return u**p * np.log1p(u)
    raise ValueError(f"unknown term code {code}")


def base_deriv(code, p, u):
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if code == POWER:
            return p * u ** (p - 1.0)
        if code == EXP_MINUS_LINEAR:
            return np.expm1(u)
        if code == EXP_SQUARE:
            return 2.0 * u * np.exp(u * u)
        if code == ENTROPY_LIKE:
            return np.log1p(u)
        if code == POWER_LOG:
            return p * u ** (p - 1.0) * np.log1p(u) + u**p / (1.0 + u)
    raise ValueError(f"unknown term code {code}")


def terms_eval(codes, ps, coefs, u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for code, p, c in zip(codes, ps, coefs):
        out = out + c * base_eval(int(code), float(p), u)
    return out


def terms_deriv(codes, ps, coefs, u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for code, p, c in zip(codes, ps, coefs):
        out = out + c * base_deriv(int(code), float(p), u)
    return out


# -- generic searches over a scalar map s -> modular(s * x) -----------------


def luxemburg_search(modular_at, xmax, n, wmax, rtol):
    """Smallest ``lam`` with ``modular_at(1/lam) <= 1``, to relative width ``rtol``.

    ``modular_at`` must be nondecreasing in its argument, ``xmax > 0``.
    """
    hi = xmax * n * wmax + 1.0
    steps = 0
    while modular_at(1.0 / hi) > 1.0:
        hi *= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise ArithmeticError("no upper bracket for the Luxemburg norm")
    lo = 0.5 * hi
    while modular_at(1.0 / lo) <= 1.0:
        hi = lo
        lo *= 0.5
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise ArithmeticError("no lower bracket for the Luxemburg norm")
    for _ in range(MAX_BISECT_STEPS):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if modular_at(1.0 / mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def orlicz_search(modular_at, xmax, rtol):
    """Minimum over ``lam > 0`` of ``(1 + modular_at(lam)) / lam``.

    The objective is unimodal in ``t = log(lam)``; bracket it with unit steps
    in ``t`` and refine with golden sections until the bracket is ``rtol`` wide.
    """

    def g(t):
        lam = math.exp(t)
        return (1.0 + modular_at(lam)) / lam

    t_b = -math.log(xmax)
    g_b = g(t_b)
    t_c = t_b + 1.0
    g_c = g(t_c)
    if g_c < g_b:
        t_a, g_a = t_b, g_b
        t_b, g_b = t_c, g_c
        t_c = t_b + 1.0
        g_c = g(t_c)
        steps = 0
        while g_c < g_b:
            t_a, g_a = t_b, g_b
            t_b, g_b = t_c, g_c
            t_c = t_b + 1.0
            g_c = g(t_c)
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise ArithmeticError("no bracket for the Orlicz norm")
    else:
        t_a = t_b - 1.0
        g_a = g(t_a)
        steps = 0
        while g_a < g_b:
            t_c, g_c = t_b, g_b
            t_b, g_b = t_a, g_a
            t_a = t_b - 1.0
            g_a = g(t_a)
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise ArithmeticError("no bracket for the Orlicz norm")

    lo, hi = t_a, t_c
    best = g_b
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1 = g(x1)
    f2 = g(x2)
    for _ in range(MAX_GOLDEN_STEPS):
        if hi - lo <= rtol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = g(x2)
    return min(best, f1, f2)


# -- term-encoded entry points (same names as the compiled module) ----------


def modular_terms(codes, ps, coefs, x, w, scale=1.0):
    vals = terms_eval(codes, ps, coefs, np.abs(x) * scale)
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(vals * w))


def _prepare(x, w):
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    return x, w


def normalized(x):
    """``(x / max|x|, max|x|)``.  Both norms are homogeneous, so searching on
    the unit-sup profile keeps ``lam`` near 1 whatever the magnitude of ``x``."""
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    if xmax == 0.0 or not math.isfinite(xmax):
        return x, xmax
    return x / xmax, xmax


def luxemburg_terms(codes, ps, coefs, x, w, rtol):
    x, w = _prepare(x, w)
    x, xmax = normalized(x)
    if xmax == 0.0:
        return 0.0
    return xmax * luxemburg_search(lambda s: modular_terms(codes, ps, coefs, x, w, s),
                                   1.0, x.size, float(np.max(w)), rtol)


def orlicz_terms(codes, ps, coefs, x, w, rtol):
    x, w = _prepare(x, w)
    x, xmax = normalized(x)
    if xmax == 0.0:
        return 0.0
    return xmax * orlicz_search(lambda s: modular_terms(codes, ps, coefs, x, w, s), 1.0, rtol)


def luxemburg_batch_terms(codes, ps, coefs, X, w, rtol):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.array([luxemburg_terms(codes, ps, coefs, row, w, rtol) for row in X])
