"""Modular functional, Luxemburg and Orlicz norms, and their relations."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import _core
from . import _fallback as fb
from .measure import coupling, l2_norm

ROOT_RTOL = 1e-10
REPORT_TOL = 1e-8


def _python_modular_at(M, x, w):
    ax = np.abs(x)

    def at(scale):
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.sum(M(ax * scale) * w))

    return at


def modular(M, space, x):
    """``sum_i M(|x_i|) mu_i``; ``inf`` once a cell overflows."""
    x = space.grid_function(x)
    if M.terms is not None:
        return float(_core.kernels.modular_terms(*M.terms, x, space.weights, 1.0))
    return _python_modular_at(M, x, space.weights)(1.0)


def luxemburg_norm(M, space, x, rtol=ROOT_RTOL):
    """``inf {lam > 0 : modular(x / lam) <= 1}`` by bracketed bisection.

    The returned value is the upper end of the final bracket, so
    ``modular(x / norm) <= 1`` always holds.
    """
    x = space.grid_function(x)
    if M.terms is not None:
        return float(_core.kernels.luxemburg_terms(*M.terms, x, space.weights, rtol))
    x, xmax = fb.normalized(x)
    if xmax == 0.0:
        return 0.0
    return xmax * fb.luxemburg_search(_python_modular_at(M, x, space.weights), 1.0, space.n,
                                      float(space.weights.max()), rtol)


def luxemburg_norms(M, space, X, rtol=ROOT_RTOL):
    """Row-wise Luxemburg norms of a 2-D array of grid functions."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != space.n:
        raise ValueError("rows must have one value per cell")
    if M.terms is None:
        return np.array([luxemburg_norm(M, space, row, rtol) for row in X])
    threads = _core.thread_cap()
    if threads == 1 or X.shape[0] < 2 * threads:
        return _core.kernels.luxemburg_batch_terms(*M.terms, X, space.weights, rtol)
    chunks = np.array_split(X, threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = pool.map(
            lambda c: _core.kernels.luxemburg_batch_terms(*M.terms, c, space.weights, rtol),
            chunks)
        return np.concatenate(list(parts))


def orlicz_norm(M, space, x, rtol=ROOT_RTOL):
    """``inf_{lam > 0} (1 + modular(lam x)) / lam`` by log-scan and golden sections."""
    x = space.grid_function(x)
    if M.terms is not None:
        return float(_core.kernels.orlicz_terms(*M.terms, x, space.weights, rtol))
    x, xmax = fb.normalized(x)
    if xmax == 0.0:
        return 0.0
    return xmax * fb.orlicz_search(_python_modular_at(M, x, space.weights), 1.0, rtol)


def char_norms(M, measure_of_set):
    """Closed-form norms of a characteristic function of a set of measure ``measure_of_set``."""
    if not measure_of_set > 0:
        raise ValueError("set measure must be positive")
    y = 1.0 / measure_of_set
    return {
        "luxemburg": 1.0 / float(M.inverse(y)),
        "orlicz": measure_of_set * float(M.conjugate().inverse(y)),
    }


@dataclass
class RelationCheck:
    name: str
    value: float
    bound: float
    slack: float
    passed: bool


@dataclass
class NormReport:
    luxemburg: float
    orlicz: float
    modular_value: float
    in_orlicz_class: bool
    checks: list = field(default_factory=list)

    @property
    def relation_flags(self):
        return {c.name: c.passed for c in self.checks}

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {
            "luxemburg": self.luxemburg,
            "orlicz": self.orlicz,
            "modular": self.modular_value,
            "in_orlicz_class": self.in_orlicz_class,
            "checks": [c.__dict__.copy() for c in self.checks],
        }


def _at_least(name, value, bound, tol):
    # value >= bound, up to tol relative to the bound's scale
    slack = value - bound
    return RelationCheck(name, value, bound, slack, bool(slack >= -tol * max(1.0, abs(bound))))


def _at_most(name, value, bound, tol):
    slack = bound - value
    return RelationCheck(name, value, bound, slack, bool(slack >= -tol * max(1.0, abs(bound))))


def check_relations(M, space, x, lambdas=(0.5, 1.0, 2.0), y=None, tol=REPORT_TOL):
    """Check the modular/norm relations for one grid function.

    Always: ``L <= A <= 2 L``; ``modular <= L`` when ``L <= 1`` and
    ``modular >= L`` when ``L >= 1``; ``modular(lam x) >= lam A - 1`` for each
    ``lam``.  For the power kind, ``modular == L**p``.  With ``y`` given,
    the Hoelder-type couplings against norms under the conjugate function.
    """
    x = space.grid_function(x)
    if any(not lam > 0 for lam in lambdas):
        raise ValueError("lambda samples must be positive")
    lux = luxemburg_norm(M, space, x)
    orl = orlicz_norm(M, space, x)
    mod = modular(M, space, x)
    checks = [
        _at_least("equivalence_lower", orl, lux, tol),
        _at_most("equivalence_upper", orl, 2.0 * lux, tol),
    ]
    if lux <= 1.0:
        checks.append(_at_most("modular_le_norm", mod, lux, tol))
    if lux >= 1.0:
        checks.append(_at_least("modular_ge_norm", mod, lux, tol))
    for lam in lambdas:
        checks.append(_at_least(f"orlicz_modular[lambda={lam:g}]",
                                modular(M, space, lam * x), lam * orl - 1.0, tol))
    if M.kind == "power" and "coef" not in M.spec.params:
        target = lux ** M.spec.params["p"]
        dev = abs(mod - target)
        scale = max(mod, 1.0)
        checks.append(RelationCheck("lp_identity", mod, target, tol * scale - dev,
                                    bool(dev <= tol * scale)))
    if y is not None:
        y = space.grid_function(y)
        conj = M.conjugate()
        pair = coupling(space, y, x)
        y_lux = luxemburg_norm(conj, space, y)
        y_orl = orlicz_norm(conj, space, y)
        checks += [
            _at_most("holder_lux_orlicz", pair, y_lux * orl, tol),
            _at_most("holder_orlicz_lux", pair, y_orl * lux, tol),
            _at_most("holder_orlicz_orlicz", pair, y_orl * orl, tol),
            _at_most("holder_lux_lux_doubled", pair, 2.0 * y_lux * lux, tol),
        ]
    return NormReport(lux, orl, mod, bool(math.isfinite(mod)), checks)


def embedding_constant(M, space, n_random=10_000, seed=0, return_trace=False):
    """Empirical lower bound for ``sup ||x||_2 / ||x||_L``.

    Candidates: every single-cell indicator, the constant function, then
    ``n_random`` standard Gaussian grid functions.  The trace is the running
    supremum after each candidate group.
    """
    candidates = [np.eye(space.n), np.ones((1, space.n))]
    if n_random:
        rng = np.random.default_rng(seed)
        candidates.append(rng.standard_normal((n_random, space.n)))
    best = 0.0
    trace = []
    for X in candidates:
        norms = luxemburg_norms(M, space, X)
        l2 = np.sqrt((X * X) @ space.weights)
        ratios = l2[norms > 0] / norms[norms > 0]
        for r in np.maximum.accumulate(ratios):
            trace.append(max(best, float(r)))
        best = max(best, float(ratios.max()))
    return (best, trace) if return_trace else best


def l2_to_luxemburg_ratio(M, space, x):
    return l2_norm(space, x) / luxemburg_norm(M, space, x)
