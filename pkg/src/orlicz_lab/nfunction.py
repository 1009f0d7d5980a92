"""N-functions: catalog, evaluation, inverses, conjugates and growth probes.

An N-function here is a convex ``M: [0, inf) -> [0, inf)`` with
``M(u)/u -> 0`` at the origin and ``M(u)/u -> inf`` at infinity.  Catalog
members are described by an :class:`NFunctionSpec` and evaluated through
:class:`NFunction`, which vectorizes over numpy arrays.

Catalog kinds
-------------
``power``             ``coef * u**p``                   (p > 1)
``exp_minus_linear``  ``exp(u) - u - 1``
``exp_square``        ``exp(u**2) - 1``
``entropy_like``      ``(1 + u) log(1 + u) - u``
``power_log``         ``u**p log(1 + u)``               (p > 1)
``sum``               sum of at least two member specs
``conjugate``         numeric Legendre transform of another spec
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _fallback as fb

CATALOG_KINDS = ("power", "exp_minus_linear", "exp_square", "entropy_like", "power_log")
KINDS = CATALOG_KINDS + ("sum", "conjugate")

_TERM_CODE = {
    "power": fb.POWER,
    "exp_minus_linear": fb.EXP_MINUS_LINEAR,
    "exp_square": fb.EXP_SQUARE,
    "entropy_like": fb.ENTROPY_LIKE,
    "power_log": fb.POWER_LOG,
}

_EPS = np.finfo(float).eps


class DomainError(ValueError):
    """Argument outside the domain of an N-function operation."""


@dataclass(frozen=True)
class NFunctionSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self):
        params = dict(self.params)
        if self.kind == "sum":
            params["terms"] = [t.to_json() for t in params["terms"]]
        elif self.kind == "conjugate":
            params["of"] = params["of"].to_json()
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValueError("N-function spec must be an object with a 'kind' key")
        kind = obj["kind"]
        if kind not in KINDS:
            raise ValueError(f"unknown N-function kind {kind!r}")
        params = dict(obj.get("params", {}))
        if kind == "sum":
            params["terms"] = [cls.from_json(t) for t in params.get("terms", [])]
        elif kind == "conjugate":
            params["of"] = cls.from_json(params["of"])
        return cls(kind, params)

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown N-function kind {self.kind!r}")
        if self.kind in ("power", "power_log"):
            p = self.params.get("p")
            if p is None or not p > 1:
                raise ValueError(f"{self.kind} needs exponent p > 1, got {p!r}")
        if self.kind in CATALOG_KINDS and not self.params.get("coef", 1.0) > 0:
            raise ValueError("coef must be positive")
        if self.kind == "sum":
            terms = self.params.get("terms", [])
            if len(terms) < 2:
                raise ValueError("sum needs at least two members")
            for t in terms:
                t.validate()
        if self.kind == "conjugate":
            self.params["of"].validate()


def _as_nonneg(u):
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("N-function argument must be finite and nonnegative")
    return arr


def _solve_increasing(fn, y):
    """Vectorized bracketed bisection for ``fn(u) = y`` with ``fn`` increasing, ``fn(0) = 0``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    out[np.isposinf(y)] = np.inf
    active = (y > 0) & np.isfinite(y)
    if not active.any():
        return out
    yy = y[active]
    hi = np.ones_like(yy)
    for _ in range(fb.MAX_BRACKET_STEPS):
        low = fn(hi) < yy
        if not low.any():
            break
        hi[low] *= 2.0
    lo = 0.5 * hi
    for _ in range(fb.MAX_BRACKET_STEPS):
        high = (fn(lo) >= yy) & (lo > 0)
        if not high.any():
            break
        hi[high] = lo[high]
        lo[high] *= 0.5
    for _ in range(fb.MAX_BISECT_STEPS):
        open_ = hi - lo > 4.0 * _EPS * hi
        if not open_.any():
            break
        mid = 0.5 * (lo + hi)
        below = fn(mid) < yy
        lo = np.where(open_ & below, mid, lo)
        hi = np.where(open_ & ~below, mid, hi)
    out[active] = 0.5 * (lo + hi)
    return out


def _scalar_out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


class NFunction:
    """Vectorized evaluation of a catalog N-function.

    ``terms`` holds the ``(codes, ps, coefs)`` encoding understood by the
    kernels, or ``None`` when the function (a numeric conjugate, or a sum
    containing one) can only be evaluated in Python.
    """

    def __init__(self, spec, *, validate=True):
        if validate:
            spec.validate()
        self.spec = spec
        kind = spec.kind
        self._members = ()
        self._base = None
        if kind == "sum":
            self._members = tuple(NFunction(t, validate=False) for t in spec.params["terms"])
        elif kind == "conjugate":
            self._base = NFunction(spec.params["of"], validate=False)
        self.terms = self._encode()

    def _encode(self):
        kind = self.spec.kind
        if kind in _TERM_CODE:
            return (np.array([_TERM_CODE[kind]], dtype=np.int_),
                    np.array([float(self.spec.params.get("p", 0.0))]),
                    np.array([float(self.spec.params.get("coef", 1.0))]))
        if kind == "sum" and all(m.terms is not None for m in self._members):
            return tuple(np.concatenate([m.terms[i] for m in self._members]) for i in range(3))
        return None

    @property
    def kind(self):
        return self.spec.kind

    @property
    def name(self):
        p = self.spec.params
        if self.kind in ("power", "power_log"):
            tag = f"{self.kind}(p={p['p']:g}"
            tag += f",coef={p['coef']:g})" if "coef" in p else ")"
            return tag
        if self.kind == "sum":
            return "sum(" + "+".join(m.name for m in self._members) + ")"
        if self.kind == "conjugate":
            return f"conjugate({self._base.name})"
        return self.kind

    def __repr__(self):
        return f"NFunction({self.name})"

    def __call__(self, u):
        arr = np.asarray(u, dtype=float)
        return _scalar_out(self._eval(arr), u)

    def _eval(self, u):
        if self.terms is not None:
            return fb.terms_eval(*self.terms, u)
        if self.kind == "sum":
            return sum(m._eval(u) for m in self._members)
        v = u
        arg = self._base.deriv_inverse(v)
        with np.errstate(over="ignore", invalid="ignore"):
            val = v * arg - self._base._eval(arg)
        # stationary value is >= 0; clip cancellation noise
        return np.where(v == 0, 0.0, np.maximum(val, 0.0))

    def deriv(self, u):
        arr = np.asarray(u, dtype=float)
        return _scalar_out(self._deriv(arr), u)

    def _deriv(self, u):
        if self.terms is not None:
            return fb.terms_deriv(*self.terms, u)
        if self.kind == "sum":
            return sum(m._deriv(u) for m in self._members)
        return self._base.deriv_inverse(u)

    def deriv_inverse(self, v):
        """Solve ``M'(u) = v`` (``M'`` is increasing with ``M'(0) = 0``)."""
        v = np.asarray(v, dtype=float)
        if self.kind == "conjugate":
            return self._base._deriv(v)
        if self.kind == "power":
            p, c = self.spec.params["p"], self.spec.params.get("coef", 1.0)
            return (v / (c * p)) ** (1.0 / (p - 1.0))
        if self.kind == "exp_minus_linear" and self.spec.params.get("coef", 1.0) == 1.0:
            return np.log1p(v)
        if self.kind == "entropy_like" and self.spec.params.get("coef", 1.0) == 1.0:
            with np.errstate(over="ignore"):
                return np.expm1(v)
        return _solve_increasing(self._deriv, v)

    def inverse(self, y):
        arr = np.asarray(y, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0):
            raise DomainError("inverse needs y >= 0")
        if np.any(np.isposinf(arr)):
            raise DomainError("inverse needs finite y")
        if self.kind == "power":
            p, c = self.spec.params["p"], self.spec.params.get("coef", 1.0)
            return _scalar_out((arr / c) ** (1.0 / p), y)
        return _scalar_out(_solve_increasing(self._eval, arr), y)

    def conjugate(self, numeric=False):
        """Conjugate N-function ``v -> sup_u (u v - M(u))``.

        Closed forms are used for the power family and the
        ``exp_minus_linear``/``entropy_like`` pair; everything else, or any
        function when ``numeric=True``, gets a numeric transform that solves
        ``M'(u) = v`` by bisection.
        """
        p = self.spec.params
        if not numeric:
            if self.kind == "power":
                q = p["p"] / (p["p"] - 1.0)
                c = p.get("coef", 1.0)
                c_star = (p["p"] - 1.0) / p["p"] * (c * p["p"]) ** (-1.0 / (p["p"] - 1.0))
                params = {"p": q}
                if not math.isclose(c_star, 1.0, rel_tol=1e-15, abs_tol=0.0):
                    params["coef"] = c_star
                return NFunction(NFunctionSpec("power", params), validate=False)
            if p.get("coef", 1.0) == 1.0:
                if self.kind == "exp_minus_linear":
                    return entropy_like()
                if self.kind == "entropy_like":
                    return exp_minus_linear()
            if self.kind == "conjugate":
                return self._base
        return NFunction(NFunctionSpec("conjugate", {"of": self.spec}), validate=False)

    def overflow_edge(self, cap=1e6):
        """Largest convenient argument with finite value (at most ``cap``)."""
        if np.isfinite(self._eval(np.array(cap))):
            return cap
        return float(self.inverse(1e300))


# -- catalog constructors ---------------------------------------------------


def power(p, coef=None):
    params = {"p": float(p)}
    if coef is not None:
        params["coef"] = float(coef)
    return NFunction(NFunctionSpec("power", params))


def exp_minus_linear():
    return NFunction(NFunctionSpec("exp_minus_linear"))


def exp_square():
    return NFunction(NFunctionSpec("exp_square"))


def entropy_like():
    return NFunction(NFunctionSpec("entropy_like"))


def power_log(p):
    return NFunction(NFunctionSpec("power_log", {"p": float(p)}))


def nsum(*members):
    return NFunction(NFunctionSpec("sum", {"terms": [m.spec for m in members]}))


def from_json(obj, *, validate=True):
    return NFunction(NFunctionSpec.from_json(obj), validate=validate)


def catalog(p=2.0):
    """The five catalog N-functions, power and power_log at exponent ``p``."""
    return {
        "power": power(p),
        "exp_minus_linear": exp_minus_linear(),
        "exp_square": exp_square(),
        "entropy_like": entropy_like(),
        "power_log": power_log(p),
    }


# -- module-level operations ------------------------------------------------


def evaluate(M, u):
    _as_nonneg(u)
    return M(u)


def inverse(M, y):
    return M.inverse(y)


def conjugate(M, numeric=False):
    return M.conjugate(numeric=numeric)


@dataclass
class NFunctionReport:
    name: str
    worst_convexity_violation: float
    increasing: bool
    zero_at_origin: bool
    ratio_small: float
    ratio_one: float
    ratio_large: float
    ratio_grid_min: float
    ratio_grid_max: float
    small_ok: bool
    large_ok: bool
    passed: bool

    def as_dict(self):
        return dict(self.__dict__)


SMALL_PROBE, LARGE_PROBE = 1e-6, 1e6


def verify_nfunction(M, grid, *, rtol=1e-12):
    """Finite-grid evidence that ``M`` is an N-function.

    Convexity is checked on every pair of grid points through the midpoint
    inequality.  The two limit conditions are read as ratio policies against
    ``M(1)/1``: ``M(u)/u`` at ``u = 1e-6`` must be at most ``1e-2 * M(1)``
    and at ``u = 1e6`` at least ``10 * M(1)`` (overflow counts as large).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) < 0):
        raise ValueError("grid must be nonempty and sorted")
    vals = M(grid)
    fin = np.isfinite(vals)
    g, v = grid[fin], vals[fin]

    mid = M(0.5 * (g[:, None] + g[None, :]))
    avg = 0.5 * (v[:, None] + v[None, :])
    ok = np.isfinite(mid)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(ok & (avg > 0), (mid - avg) / np.where(avg > 0, avg, 1.0), 0.0)
    worst = float(max(rel.max(), 0.0)) if rel.size else 0.0

    pos = g > 0
    increasing = bool(np.all(np.diff(v[pos]) > 0)) if pos.sum() > 1 else True
    zero_ok = float(M(0.0)) == 0.0

    m1 = float(M(1.0))
    r_small = float(M(SMALL_PROBE)) / SMALL_PROBE
    big = float(M(LARGE_PROBE))
    r_large = big / LARGE_PROBE if np.isfinite(big) else math.inf
    small_ok = r_small <= 1e-2 * m1
    large_ok = r_large >= 10.0 * m1
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = v[pos] / g[pos]
    return NFunctionReport(
        name=M.name,
        worst_convexity_violation=worst,
        increasing=increasing,
        zero_at_origin=zero_ok,
        ratio_small=r_small,
        ratio_one=m1,
        ratio_large=r_large,
        ratio_grid_min=float(ratios[0]) if ratios.size else math.nan,
        ratio_grid_max=float(ratios[-1]) if ratios.size else math.nan,
        small_ok=small_ok,
        large_ok=large_ok,
        passed=bool(worst <= rtol and increasing and zero_ok and small_ok and large_ok),
    )


@dataclass
class ProbeResult:
    probe: str
    name: str
    verdict: bool
    value: float
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {"probe": self.probe, "name": self.name, "verdict": self.verdict,
                "value": self.value, **self.detail}


def _log_grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)


def delta2_probe(M, u_max=1e4, n=200):
    """Evidence for the doubling condition ``limsup M(2u)/M(u) < inf``.

    Verdict: the ratio at ``u_max`` is at most twice the ratio at
    ``u_max/10``; overflow of ``M(2u)`` on the grid is a failing verdict.
    """
    if u_max < 10:
        raise ValueError("u_max must be at least 10")
    grid = _log_grid(1.0, u_max, n)
    num, den = M(2.0 * grid), M(grid)
    bad = ~(np.isfinite(num) & np.isfinite(den))
    if bad.any():
        i = int(np.argmax(bad))
        sup = float(np.max(num[:i] / den[:i])) if i else math.inf
        return ProbeResult("delta2", M.name, False, sup,
                           {"overflow": True, "diverging_u": float(grid[i])})
    ratios = num / den
    top = float(M(2.0 * u_max) / M(u_max))
    prev = float(M(0.2 * u_max) / M(0.1 * u_max))
    return ProbeResult("delta2", M.name, bool(top <= 2.0 * prev), float(ratios.max()),
                       {"overflow": False, "ratio_top": top, "ratio_decade_below": prev})


def delta3_probe(M, k, u_max=1e4, n=200):
    """Evidence for ``u M(u) <= M(k u)`` on ``[u0, u_max]``.

    ``u0`` is the smallest grid point from which the inequality holds up to
    the end of the finite range; the verdict requires that tail to span at
    least one decade.
    """
    if not k > 1:
        raise ValueError("delta3_probe needs k > 1")
    grid = _log_grid(1.0, u_max, n)
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = grid * M(grid)
        rhs = M(k * grid)
    comparable = np.isfinite(lhs)
    end = int(np.argmin(comparable)) if not comparable.all() else grid.size
    ok = lhs[:end] <= rhs[:end]
    detail = {"overflow": end < grid.size,
              "u_end": float(grid[end - 1]) if end else math.nan}
    if end == 0 or not ok[-1]:
        return ProbeResult("delta3", M.name, False, math.nan, detail)
    fails = np.flatnonzero(~ok)
    start = int(fails[-1]) + 1 if fails.size else 0
    u0 = float(grid[start])
    detail["u0"] = u0
    return ProbeResult("delta3", M.name, bool(u0 <= grid[end - 1] / 10.0), u0, detail)


GROWTH4_DECADE_FACTOR = 10.0**0.1


def growth_condition4_probe(M, k=2.0, u_max=1e6, n=200):
    """Evidence that ``M(k u) / (u * Mc^{-1}(u)) -> inf``, ``Mc`` the conjugate.

    Verdict: the ratio is nondecreasing over the top decade of the finite
    range and grows across it by at least ``10**0.1`` (a log-log slope of
    0.1 or more).  Overflow truncates the range.
    """
    if not k > 1:
        raise ValueError("growth_condition4_probe needs k > 1")
    conj = M.conjugate()
    grid = _log_grid(1.0, u_max, n)
    num = M(k * grid)
    den = grid * conj.inverse(grid)
    with np.errstate(over="ignore", invalid="ignore"):
        r = num / den
    fin = np.isfinite(r)
    end = int(np.argmin(fin)) if not fin.all() else grid.size
    detail = {"overflow": end < grid.size}
    if end < 2:
        return ProbeResult("condition4", M.name, False, math.nan, detail)
    g, rr = grid[:end], r[:end]
    top = g >= g[-1] / 10.0
    if g[0] > g[-1] / 10.0:
        detail["short_range"] = True
        return ProbeResult("condition4", M.name, False, float(rr[-1]), detail)
    i0 = int(np.argmax(top))
    seg = rr[i0:]
    growth = float(seg[-1] / seg[0])
    increasing = bool(np.all(np.diff(seg) >= -1e-12 * np.abs(seg[1:])))
    detail.update({"u_end": float(g[-1]), "decade_growth": growth, "increasing": increasing})
    return ProbeResult("condition4", M.name, bool(increasing and growth >= GROWTH4_DECADE_FACTOR),
                       float(rr[-1]), detail)
