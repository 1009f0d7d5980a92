"""Growth minorants of N-functions and the modular lower bounds they imply.

A minorant ``phi`` satisfies ``M(lam u) >= phi(lam) M(u)`` (arity 1) or
``M(lam u) >= phi(lam, u) M(u)`` (arity 2) for ``lam >= 1`` (domain
``"large"``) or ``0 < lam <= 1`` (domain ``"small"``).  For a grid
function ``x`` with Luxemburg norm ``r`` the bounds checked here are

* large, arity 1:  ``modular(x) >= phi(r)``                 for ``r >= 1``
* large, arity 2:  ``modular(x) >= phi(r/R, (R-1)/(R n1))`` for ``r >= R > 1``
* small, arity 1:  ``modular(x) >= phi(r)``                 for ``0 < r <= 1``
* small, arity 2:  ``modular(x) >= phi((1 - h n1) r, h)``   for ``0 < r <= 1``

where ``n1`` is the Luxemburg norm of the constant function 1 and
``0 < h < 1/n1``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import nfunction as nf
from .measure import MeasureSpace, indicator, refine, truncate_below
from .modular import REPORT_TOL, luxemburg_norm, luxemburg_norms, modular

LARGE, SMALL = "large", "small"


@dataclass(frozen=True)
class PhiMinorant:
    name: str
    arity: int
    func: object
    domain: str

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")
        if self.domain not in (LARGE, SMALL):
            raise ValueError("domain must be 'large' or 'small'")

    def __call__(self, lam, u=None):
        if self.arity == 1:
            return self.func(lam)
        return self.func(lam, u)


def power_phi(k, domain=LARGE):
    return PhiMinorant(f"lambda^{k:g}", 1, lambda lam: np.asarray(lam, float) ** k, domain)


def baseline_phi():
    """0 below 1 and the identity from 1 on; valid for every N-function."""
    return PhiMinorant("baseline", 1,
                       lambda lam: np.where(np.asarray(lam, float) >= 1.0, lam, 0.0), LARGE)


def ratio_phi(M, domain, name=None):
    """``phi(lam, u) = M(lam u) / M(u)``, the sharpest two-argument minorant.

    At ``u = 0`` the limit is read off at ``u = 1e-8``.
    """

    def func(lam, u):
        lam = np.asarray(lam, float)
        u = np.asarray(u, float)
        uu = np.where(u > 0, u, 1e-8)
        with np.errstate(over="ignore", invalid="ignore"):
            return M(lam * uu) / M(uu)

    return PhiMinorant(name or f"ratio[{M.name}]", 2, func, domain)


def exp_linear_phi():
    """``(e^{lam u} - lam u - 1) / (e^u - u - 1)``, equal to ``lam^2`` at ``u = 0``."""
    M = nf.exp_minus_linear()

    def func(lam, u):
        lam = np.asarray(lam, float)
        u = np.asarray(u, float)
        uu = np.where(u > 0, u, 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            r = M(lam * uu) / M(uu)
        return np.where(u > 0, r, lam * lam)

    return PhiMinorant("exp_linear_ratio", 2, func, LARGE)


def exp_square_phi():
    """``(e^{lam^2 u^2} - 1) / (e^{u^2} - 1)``, equal to ``lam^2`` at ``u = 0``."""

    def func(lam, u):
        lam = np.asarray(lam, float)
        u = np.asarray(u, float)
        uu = np.where(u > 0, u, 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.expm1((lam * uu) ** 2) / np.expm1(uu * uu)
        return np.where(u > 0, r, lam * lam)

    return PhiMinorant("exp_square_ratio", 2, func, LARGE)


def phi_from_json(obj, M=None):
    """Build a minorant from ``{"kind": ..., ...}``; ``ratio`` needs ``M``."""
    kind = obj.get("kind")
    domain = obj.get("domain", LARGE)
    if kind == "power":
        return power_phi(float(obj["k"]), domain)
    if kind == "baseline":
        return baseline_phi()
    if kind == "exp_linear":
        return exp_linear_phi()
    if kind == "exp_square":
        return exp_square_phi()
    if kind == "ratio":
        if M is None:
            raise ValueError("ratio minorant needs an N-function")
        return ratio_phi(M, domain)
    raise ValueError(f"unknown minorant kind {kind!r}")


# -- minorant verification --------------------------------------------------

GRID_POINTS = 200


def default_lambda_grid(domain, n=GRID_POINTS):
    if domain == LARGE:
        return np.logspace(0.0, 2.0, n)
    return np.logspace(-4.0, 0.0, n)


def default_u_grid(M, n=GRID_POINTS):
    return np.logspace(-6.0, math.log10(M.overflow_edge()), n)


@dataclass
class MinorantReport:
    name: str
    phi: str
    worst_violation: float
    worst_lambda: float
    worst_u: float
    monotone_lambda: bool
    monotone_u: bool
    skipped_pairs: int
    passed: bool

    def as_dict(self):
        return dict(self.__dict__)


def verify_minorant(M, phi, lam_grid=None, u_grid=None, rtol=1e-12):
    """Worst relative violation of ``M(lam u) >= phi * M(u)`` over two grids.

    The violation at a pair is ``(phi M(u) - M(lam u)) / scale`` with
    ``scale = max(M(lam u), phi M(u))``; the pair passes when it is at most
    ``rtol``.  Pairs where anything overflows are skipped and counted.  For
    arity 2 the grid monotonicity of ``phi`` in both arguments is checked too.
    """
    lam = np.asarray(default_lambda_grid(phi.domain) if lam_grid is None else lam_grid, float)
    u = np.asarray(default_u_grid(M) if u_grid is None else u_grid, float)
    if phi.domain == LARGE and np.any(lam < 1):
        raise ValueError("large-domain minorant needs lambda >= 1")
    if phi.domain == SMALL and (np.any(lam <= 0) or np.any(lam > 1)):
        raise ValueError("small-domain minorant needs 0 < lambda <= 1")
    if np.any(u <= 0):
        raise ValueError("u grid must be positive")
    L, U = np.meshgrid(lam, u, indexing="ij")
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = M(L * U)
        mu = M(U)
        ph = phi(lam)[:, None] * np.ones_like(U) if phi.arity == 1 else phi(L, U)
        rhs = ph * mu
        scale = np.maximum(lhs, rhs)
        ok = np.isfinite(lhs) & np.isfinite(rhs) & (scale > 0)
        viol = np.where(ok, (rhs - lhs) / np.where(ok, scale, 1.0), -np.inf)
    i, j = np.unravel_index(int(np.argmax(viol)), viol.shape)
    worst = float(viol[i, j])

    mono_l = mono_u = True
    if phi.arity == 2:
        fin = np.isfinite(ph)
        with np.errstate(invalid="ignore"):
            dl = np.diff(ph, axis=0)
            du = np.diff(ph, axis=1)
            tol_l = rtol * np.abs(ph[1:, :])
            tol_u = rtol * np.abs(ph[:, 1:])
            mono_l = bool(np.all((dl >= -tol_l) | ~(fin[1:, :] & fin[:-1, :])))
            mono_u = bool(np.all((du >= -tol_u) | ~(fin[:, 1:] & fin[:, :-1])))
    return MinorantReport(
        name=M.name, phi=phi.name, worst_violation=worst,
        worst_lambda=float(lam[i]), worst_u=float(u[j]),
        monotone_lambda=mono_l, monotone_u=mono_u,
        skipped_pairs=int((~ok).sum()),
        passed=bool(worst <= rtol and mono_l and mono_u),
    )


# -- bound reports ----------------------------------------------------------


@dataclass
class BoundReport:
    theorem: str
    applicable: bool
    norm: float
    bound_value: float
    actual: float
    slack: float
    passed: bool
    witness: dict = field(default_factory=dict)

    def as_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "witness"}
        d.update({k: v for k, v in self.witness.items() if np.ndim(v) == 0})
        return d


def _slack_tolerance(bound):
    return REPORT_TOL * max(1.0, abs(bound))


def _report(theorem, norm, bound, actual, witness):
    slack = actual - bound
    return BoundReport(theorem, True, norm, bound, actual, slack,
                       bool(slack >= -_slack_tolerance(bound)), witness)


def _not_applicable(theorem, norm, actual, reason):
    return BoundReport(theorem, False, norm, math.nan, actual, math.nan, True, {"reason": reason})


def _require(phi, arity, domain):
    if phi.arity != arity or phi.domain != domain:
        raise ValueError(f"need an arity-{arity} {domain}-domain minorant, got {phi.name}")


def unit_norm(M, space):
    """Luxemburg norm of the constant function 1."""
    return luxemburg_norm(M, space, space.ones())


def theorem1_bound(M, space, x, phi, norm=None):
    """``modular(x) >= phi(||x||)`` for ``||x|| >= 1``."""
    _require(phi, 1, LARGE)
    r = luxemburg_norm(M, space, x) if norm is None else norm
    mod = modular(M, space, x)
    if r < 1.0:
        return _not_applicable("theorem1", r, mod, "norm below 1")
    return _report("theorem1", r, float(phi(r)), mod, {"phi": phi.name})


def theorem2_bound(M, space, x, phi, R=2.0, allow_r_one=False, norm=None, n1=None):
    """``modular(x) >= phi(||x||/R, (R-1)/(R ||1||))`` for ``||x|| >= R``.

    ``R = 1`` is accepted only with ``allow_r_one`` (continuous ``phi``).
    The witness holds the truncation ``x_h`` (entries with
    ``|x_i| >= h ||x||``) and checks ``||x_h|| >= ||x||/R``.
    """
    _require(phi, 2, LARGE)
    if R < 1.0 or (R == 1.0 and not allow_r_one):
        raise ValueError("theorem2 needs R > 1 (or R = 1 with allow_r_one)")
    r = luxemburg_norm(M, space, x) if norm is None else norm
    mod = modular(M, space, x)
    if r < R:
        return _not_applicable("theorem2", r, mod, "norm below R")
    n1 = unit_norm(M, space) if n1 is None else n1
    h = (R - 1.0) / (R * n1)
    x_h = truncate_below(x, h * r)
    r_h = luxemburg_norm(M, space, x_h)
    bound = float(phi(r / R, h))
    witness = {"phi": phi.name, "R": R, "h": h, "unit_norm": n1, "x_h": x_h,
               "x_h_norm": r_h,
               "x_h_norm_ok": bool(r_h >= r / R * (1.0 - REPORT_TOL))}
    rep = _report("theorem2", r, bound, mod, witness)
    rep.passed = rep.passed and witness["x_h_norm_ok"]
    return rep


def theorem3_bound(M, space, x, phi, norm=None):
    """``modular(x) >= phi(||x||)`` for ``0 < ||x|| <= 1``."""
    _require(phi, 1, SMALL)
    r = luxemburg_norm(M, space, x) if norm is None else norm
    mod = modular(M, space, x)
    if not 0.0 < r <= 1.0:
        return _not_applicable("theorem3", r, mod, "norm outside (0, 1]")
    return _report("theorem3", r, float(phi(r)), mod, {"phi": phi.name})


def theorem4_bound(M, space, x, phi, h, norm=None, n1=None):
    """``modular(x) >= phi((1 - h ||1||) ||x||, h)`` for ``0 < ||x|| <= 1``."""
    _require(phi, 2, SMALL)
    n1 = unit_norm(M, space) if n1 is None else n1
    if not 0.0 < h < 1.0 / n1:
        raise ValueError(f"h must lie in (0, 1/||1||) = (0, {1.0 / n1:.6g})")
    r = luxemburg_norm(M, space, x) if norm is None else norm
    mod = modular(M, space, x)
    if not 0.0 < r <= 1.0:
        return _not_applicable("theorem4", r, mod, "norm outside (0, 1]")
    x_h = truncate_below(x, h * r)
    r_h = luxemburg_norm(M, space, x_h)
    lower = (1.0 - h * n1) * r
    witness = {"phi": phi.name, "h": h, "unit_norm": n1, "x_h": x_h, "x_h_norm": r_h,
               "x_h_norm_ok": bool(r_h >= lower * (1.0 - REPORT_TOL))}
    rep = _report("theorem4", r, float(phi(lower, h)), mod, witness)
    rep.passed = rep.passed and witness["x_h_norm_ok"]
    return rep


# -- sampling ---------------------------------------------------------------


def sample_with_norms(M, space, rng, count, norm_lo, norm_hi):
    """Random grid functions rescaled to Luxemburg norms drawn log-uniformly.

    Shapes cycle through dense Gaussian, sparse spikes and two-level
    step functions so truncation arguments see varied supports.
    Returns ``(X, norms)`` with norms recomputed after rescaling.
    """
    n = space.n
    X = rng.standard_normal((count, n))
    kind = np.arange(count) % 3
    spikes = kind == 1
    if spikes.any():
        mask = rng.random((int(spikes.sum()), n)) < 0.15
        mask[np.arange(mask.shape[0]), rng.integers(0, n, mask.shape[0])] = True
        X[spikes] = np.where(mask, X[spikes] * 3.0, 0.0)
    steps = kind == 2
    if steps.any():
        cut = rng.random((int(steps.sum()), n)) < 0.5
        X[steps] = np.where(cut, 1.0, 0.2) * np.sign(X[steps])
    targets = np.exp(rng.uniform(math.log(norm_lo), math.log(norm_hi), count))
    X = X * (targets / luxemburg_norms(M, space, X))[:, None]
    return X, luxemburg_norms(M, space, X)


@dataclass
class SweepSummary:
    theorem: str
    name: str
    phi: str
    samples: int
    applicable: int
    violations: int
    min_slack: float
    reports: list = field(default_factory=list, repr=False)

    @property
    def passed(self):
        return self.violations == 0 and self.applicable > 0


def sweep(theorem, M, space, phi, rng, count, **kwargs):
    """Run one theorem bound on ``count`` random admissible grid functions."""
    if theorem == "theorem1":
        X, norms = sample_with_norms(M, space, rng, count, 1.001, 8.0)
        reports = [theorem1_bound(M, space, x, phi, norm=r) for x, r in zip(X, norms)]
    elif theorem == "theorem2":
        R = kwargs.get("R", 2.0)
        n1 = unit_norm(M, space)
        X, norms = sample_with_norms(M, space, rng, count, R * 1.001, 4.0 * R)
        reports = [theorem2_bound(M, space, x, phi, R=R, norm=r, n1=n1)
                   for x, r in zip(X, norms)]
    elif theorem == "theorem3":
        X, norms = sample_with_norms(M, space, rng, count, 1e-3, 0.999)
        reports = [theorem3_bound(M, space, x, phi, norm=r) for x, r in zip(X, norms)]
    elif theorem == "theorem4":
        n1 = unit_norm(M, space)
        h = kwargs.get("h_fraction", 0.5) / n1
        X, norms = sample_with_norms(M, space, rng, count, 1e-3, 0.999)
        reports = [theorem4_bound(M, space, x, phi, h, norm=r, n1=n1)
                   for x, r in zip(X, norms)]
    else:
        raise ValueError(f"unknown theorem {theorem!r}")
    applicable = [r for r in reports if r.applicable]
    return SweepSummary(
        theorem, M.name, phi.name, count, len(applicable),
        sum(not r.passed for r in applicable),
        min((r.slack for r in applicable), default=math.nan),
        reports,
    )


# -- sandwich inequalities --------------------------------------------------


@dataclass
class SandwichReport:
    which: str
    p: float
    lower_exponent: float
    upper_exponent: float
    worst_lower: float
    worst_upper: float
    passed: bool


def sandwich_check(which, p=2.0, lam_grid=None, u_grid=None, rtol=1e-12):
    """Check ``lam^a M(u) <= M(lam u) <= lam^b M(u)`` for ``0 < lam < 1``.

    ``M1 = entropy_like`` with ``(a, b) = (2, 1)``; ``M2 = power_log(p)``
    with ``(p+1, p)``; ``M3 = M1 + M2`` with ``(p+1, 1)``.
    """
    if which == "M1":
        M, a, b = nf.entropy_like(), 2.0, 1.0
    elif which in ("M2", "M3"):
        if not p > 1:
            raise ValueError("p must exceed 1")
        M = nf.power_log(p)
        a, b = p + 1.0, p
        if which == "M3":
            M, b = nf.nsum(nf.entropy_like(), M), 1.0
    else:
        raise ValueError(f"unknown sandwich {which!r}")
    lam = np.logspace(-4.0, math.log10(0.999), GRID_POINTS) if lam_grid is None else lam_grid
    u = np.logspace(-6.0, 6.0, GRID_POINTS) if u_grid is None else u_grid
    lam = np.asarray(lam, float)
    u = np.asarray(u, float)
    if np.any(lam <= 0) or np.any(lam >= 1):
        raise ValueError("sandwich lambdas must lie in (0, 1)")
    L, U = np.meshgrid(lam, u, indexing="ij")
    mid = M(L * U)
    base = M(U)
    lower = L**a * base
    upper = L**b * base
    worst_lower = float(np.max((lower - mid) / mid))
    worst_upper = float(np.max((mid - upper) / upper))
    return SandwichReport(which, p, a, b, worst_lower, worst_upper,
                          bool(worst_lower <= rtol and worst_upper <= rtol))


# -- small-norm degeneracy --------------------------------------------------


@dataclass
class DegeneracyReport:
    name: str
    R: float
    measures: list
    modulars: list
    norm_errors: list
    passed: bool
    threshold: float = 1e-3


def small_norm_degeneracy_probe(M, R=0.5, refinements=20, threshold=1e-3):
    """Modulars of norm-``R`` indicator witnesses on shrinking sets.

    Starting from the unit cell, each step halves every cell; the witness is
    the first cell's indicator scaled to Luxemburg norm ``R`` with the
    closed form ``1/M^{-1}(1/mu(D))``.  The computed norm is cross-checked
    while the space has at most 512 cells.  Passes once the modular drops
    below ``threshold``.
    """
    if not 0.0 < R < 1.0:
        raise ValueError("R must lie in (0, 1)")
    space = MeasureSpace([1.0])
    measures, mods, errs = [], [], []
    for _ in range(refinements):
        space = refine(space, 2)
        chi, mu_d = indicator(space, [0])
        scale = R * float(M.inverse(1.0 / mu_d))
        x = scale * chi
        measures.append(mu_d)
        mods.append(modular(M, space, x))
        if space.n <= 512:
            errs.append(abs(luxemburg_norm(M, space, x) - R) / R)
    return DegeneracyReport(M.name, R, measures, mods, errs,
                            bool(min(mods) < threshold), threshold)
