"""Discretized Hammerstein equations ``x = S f(x) + g``.

``S`` and ``T`` are dense matrices acting on value vectors, with
``S T = I``; ``f`` is a superposition operator applied cell by cell.  The
auxiliary operator ``Phi x = T x - f(x) - T g`` carries the monotonicity
(Minty) and sphere (Rothe) conditions; roots of ``Phi`` solve the equation.
"""
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import estimates as es
from . import nfunction as nf
from .measure import MeasureSpace, coupling, l2_norm
from .modular import embedding_constant, luxemburg_norm, luxemburg_norms

EXIT_SOLVED, EXIT_UNCERTIFIED, EXIT_NOT_CONVERGED = 0, 2, 3


# -- nonlinearities ---------------------------------------------------------


def _poly(coeffs):
    coeffs = [float(c) for c in coeffs]

    def f(u):
        return np.polynomial.polynomial.polyval(u, coeffs)

    def df(u):
        return np.polynomial.polynomial.polyval(u, np.polynomial.polynomial.polyder(coeffs))

    return f, df


def _rule(kind, params):
    if kind == "zero":
        return (lambda u: np.zeros_like(u)), (lambda u: np.zeros_like(u))
    if kind == "linear":
        s = float(params.get("slope", 0.0))
        return (lambda u: s * u), (lambda u: np.full_like(u, s))
    if kind == "cubic":
        # f(u) = slope*u - coef*u^3
        return _poly([0.0, params.get("slope", 0.0), 0.0, -params.get("coef", 1.0)])
    if kind == "polynomial":
        return _poly(params["coeffs"])
    if kind == "sine":
        s = float(params.get("slope", 0.0))
        amp = float(params.get("amp", 1.0))
        k = float(params.get("freq", 1.0))
        return (lambda u: s * u + amp * np.sin(k * u)), (lambda u: s + amp * k * np.cos(k * u))
    raise ValueError(f"unknown nonlinearity kind {kind!r}")


@dataclass
class Nonlinearity:
    """Pointwise rule ``f(omega, u)`` with its certificates.

    ``delta``: ``(f(u1) - f(u2)) (u1 - u2) <= delta (u1 - u2)**2``.
    ``(a, b, c)``: ``-u f(omega, u) >= a M(b |u|) - c(omega)``.
    ``func(u, cells)`` overrides the named rule for cell-dependent ``f``;
    without ``dfunc`` its derivative uses central differences.
    """

    kind: str = "zero"
    params: dict = field(default_factory=dict)
    delta: float = 0.0
    a: float = 0.0
    b: float = 1.0
    c: object = None
    func: object = None
    dfunc: object = None

    def __post_init__(self):
        if self.func is None:
            self._f, self._df = _rule(self.kind, self.params)
        if self.a < 0 or self.b <= 0:
            raise ValueError("coercivity certificate needs a >= 0 and b > 0")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(u, np.arange(u.shape[-1])), dtype=float)
        return self._f(u)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.func is None:
            return self._df(u)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(u, np.arange(u.shape[-1])), dtype=float)
        step = np.maximum(1e-6, 1e-8 * np.abs(u))
        return (self(u + step) - self(u - step)) / (2.0 * step)

    def c_values(self, n):
        if self.c is None:
            return np.zeros(n)
        c = np.broadcast_to(np.asarray(self.c, dtype=float), (n,)).copy()
        if np.any(c < 0):
            raise ValueError("coercivity c must be nonnegative")
        return c

    def check_delta(self, n_cells, n_samples=2000, seed=0, scale=10.0):
        """Largest ``(f(u1)-f(u2))(u1-u2) - delta (u1-u2)^2`` over random pairs (relative)."""
        rng = np.random.default_rng(seed)
        u1 = rng.normal(scale=scale, size=(n_samples, n_cells))
        u2 = rng.normal(scale=scale, size=(n_samples, n_cells))
        d = u1 - u2
        gap = (self(u1) - self(u2)) * d - self.delta * d * d
        return float(np.max(gap / np.maximum(1.0, d * d)))

    def check_coercivity(self, M, n_cells, n_samples=400):
        """Largest ``a M(b|u|) - c - (-u f(u))`` over a symmetric log grid (relative)."""
        mag = np.logspace(-4.0, 2.0, n_samples)
        u = np.concatenate([-mag[::-1], [0.0], mag])[:, None] * np.ones((1, n_cells))
        with np.errstate(over="ignore", invalid="ignore"):
            rhs = self.a * M(self.b * np.abs(u)) - self.c_values(n_cells)
            lhs = -u * self(u)
            gap = np.where(np.isfinite(rhs), (rhs - lhs) / np.maximum(1.0, np.abs(lhs)), -np.inf)
        return float(np.max(gap))

    def to_json(self):
        if self.func is not None:
            raise ValueError("custom nonlinearities are not serializable")
        c = None if self.c is None else np.atleast_1d(np.asarray(self.c, float)).tolist()
        return {"kind": self.kind, "params": dict(self.params), "delta": self.delta,
                "coercivity": {"a": self.a, "b": self.b, "c": c}}

    @classmethod
    def from_json(cls, obj):
        coer = obj.get("coercivity", {}) or {}
        return cls(kind=obj.get("kind", "zero"), params=dict(obj.get("params", {})),
                   delta=float(obj.get("delta", 0.0)), a=float(coer.get("a", 0.0)),
                   b=float(coer.get("b", 1.0)), c=coer.get("c"))


# -- problem ----------------------------------------------------------------


@dataclass
class HammersteinProblem:
    space: MeasureSpace
    M: nf.NFunction
    S: np.ndarray
    T: np.ndarray
    f: Nonlinearity
    g: np.ndarray
    sigma: float

    def __post_init__(self):
        n = self.space.n
        self.S = np.asarray(self.S, dtype=float).reshape(n, n)
        self.T = np.asarray(self.T, dtype=float).reshape(n, n)
        self.g = self.space.grid_function(self.g)
        self.Tg = self.T @ self.g

    def phi(self, x):
        """``Phi x = T x - f(x) - T g``."""
        return self.T @ x - self.f(x) - self.Tg

    def residual(self, x):
        """``x - S f(x) - g``."""
        return x - self.S @ self.f(x) - self.g

    def residual_norm(self, x):
        return luxemburg_norm(self.M, self.space, self.residual(x))

    def validate(self, n_samples=1000, seed=0):
        sigma_hat = sigma_estimate(self.T, self.space, n_samples=n_samples, seed=seed)
        n = self.space.n
        return {
            "left_inverse_residual": check_left_inverse(self.S, self.T),
            "sigma_estimate": sigma_hat,
            "sigma_valid": bool(self.sigma <= sigma_hat + 1e-9 * max(1.0, abs(sigma_hat))),
            "delta_gap": self.f.check_delta(n, seed=seed),
            "coercivity_gap": self.f.check_coercivity(self.M, n),
        }

    @classmethod
    def from_json(cls, obj):
        space = MeasureSpace.from_json(obj["space"])
        n = space.n
        return cls(space=space, M=nf.from_json(obj["nfunction"]),
                   S=np.asarray(obj["S"], float).reshape(n, n),
                   T=np.asarray(obj["T"], float).reshape(n, n),
                   f=Nonlinearity.from_json(obj.get("f", {})),
                   g=np.asarray(obj["g"], float), sigma=float(obj["sigma"]))

    def to_json(self):
        return {"space": self.space.to_json(), "nfunction": self.M.spec.to_json(),
                "S": self.S.reshape(-1).tolist(), "T": self.T.reshape(-1).tolist(),
                "f": self.f.to_json(), "g": self.g.tolist(), "sigma": self.sigma}


# -- certificates -----------------------------------------------------------


def check_left_inverse(S, T):
    """``max |(S T - I)_ij|``."""
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape != T.shape:
        raise ValueError(f"S and T must be square of equal size, got {S.shape} and {T.shape}")
    return float(np.max(np.abs(S @ T - np.eye(S.shape[0]))))


def sigma_estimate(T, space, n_samples=1000, seed=0):
    """Best constant in ``<T x, x> >= sigma ||x||_2^2``.

    With ``W = diag(mu)`` the form is ``x' W T x``, so sigma is the smallest
    eigenvalue of ``W^{-1/2} (W T + T' W)/2 W^{-1/2}``.  Random Rayleigh
    quotients must not fall below it.
    """
    T = np.asarray(T, dtype=float)
    w = space.weights
    A = 0.5 * (w[:, None] * T + T.T * w[None, :])
    r = 1.0 / np.sqrt(w)
    sigma = float(np.linalg.eigvalsh(r[:, None] * A * r[None, :])[0])
    if n_samples:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n_samples, space.n))
        quotients = np.einsum("ij,ij->i", (X @ T.T) * w, X) / ((X * X) @ w)
        if quotients.min() < sigma - 1e-9 * max(1.0, abs(sigma)):
            raise ArithmeticError("Rayleigh quotient below the eigenvalue estimate")
    return sigma


def uniqueness_certificate(sigma, delta):
    if not (math.isfinite(sigma) and math.isfinite(delta)):
        raise ValueError("sigma and delta must be finite")
    return bool(sigma - delta > 0)


@dataclass
class MintyReport:
    min_inner: float
    min_normalized: float
    sigma_ge_delta: bool
    passed: bool


def verify_minty(problem, n_pairs=500, seed=0, tol=1e-9):
    """Minimum of ``<Phi x1 - Phi x2, x1 - x2>`` over random pairs."""
    rng = np.random.default_rng(seed)
    n = problem.space.n
    scales = np.exp(rng.uniform(math.log(1e-2), math.log(10.0), (n_pairs, 1)))
    X1 = rng.standard_normal((n_pairs, n)) * scales
    X2 = X1 + rng.standard_normal((n_pairs, n)) * scales * rng.uniform(0.01, 1.0, (n_pairs, 1))
    inner, normed = [], []
    for x1, x2 in zip(X1, X2):
        d = x1 - x2
        v = coupling(problem.space, problem.phi(x1) - problem.phi(x2), d)
        inner.append(v)
        normed.append(v / max(l2_norm(problem.space, d) ** 2, 1e-300))
    m = float(min(inner))
    return MintyReport(m, float(min(normed)), bool(problem.sigma >= problem.f.delta),
                       bool(m >= -tol))


def rothe_lower_bound(problem, phi, gamma):
    """``R -> E(R)``: lower bound of ``<Phi x, x> / ||x||`` on ``||x|| = R``.

    ``E(R) = s(R) + a phi(b R)/R - 2 ||T g||_* - c/R`` where ``||.||_*`` is
    the Luxemburg norm under the conjugate function, ``c = sum c_i mu_i``,
    ``s(R) = 0`` for ``sigma >= 0`` and ``sigma gamma^2 R`` otherwise.
    """
    f = problem.f
    tg = luxemburg_norm(problem.M.conjugate(), problem.space, problem.Tg)
    c = float(np.dot(f.c_values(problem.space.n), problem.space.weights))
    sigma = problem.sigma

    def E(R):
        s = sigma * gamma * gamma * R if sigma < 0 else 0.0
        return s + f.a * float(phi(f.b * R)) / R - 2.0 * tg - c / R

    return E


def rothe_radius(problem, phi, gamma=None, R_max=1e6, n_grid=600, check_phi=True):
    """Smallest ``R`` (at least ``max(1, 1/b)``) where the sphere bound is nonnegative.

    ``phi`` must be an arity-1 large-domain minorant of ``M``.  Returns
    ``None`` when no ``R <= R_max`` works.
    """
    if phi.arity != 1 or phi.domain != es.LARGE:
        raise ValueError("rothe_radius needs an arity-1 large-domain minorant")
    if check_phi and phi.name != "baseline":
        rep = es.verify_minorant(problem.M, phi)
        if not rep.passed:
            raise ValueError(f"{phi.name} is not a minorant of {problem.M.name}")
    if problem.sigma < 0 and gamma is None:
        gamma = embedding_constant(problem.M, problem.space)
    E = rothe_lower_bound(problem, phi, gamma or 0.0)
    R_min = max(1.0, 1.0 / problem.f.b)
    if R_min > R_max:
        return None
    grid = np.geomspace(R_min, R_max, n_grid)
    vals = np.array([E(R) for R in grid])
    hits = np.flatnonzero(vals >= 0)
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(R_min)
    lo, hi = grid[i - 1], grid[i]
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if E(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return float(hi)


@dataclass
class RotheReport:
    R: float
    min_value: float
    passed: bool


def verify_rothe(problem, R, n_samples=500, seed=0, tol=1e-9):
    """Minimum of ``<Phi x, x>`` over sampled ``x`` with ``||x||_L = R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(seed)
    n = problem.space.n
    X = rng.standard_normal((n_samples, n))
    spikes = rng.random((n_samples, n)) < 0.2
    X[1::2] = np.where(spikes[1::2], X[1::2], 0.0)
    X[1::2, 0] += 1e-3
    extra = [v for v in (problem.g, -problem.g, problem.Tg, -problem.Tg, np.ones(n))
             if np.any(v != 0)]
    if extra:
        X = np.vstack([X, np.array(extra)])
    X = X * (R / luxemburg_norms(problem.M, problem.space, X))[:, None]
    vals = [coupling(problem.space, problem.phi(x), x) for x in X]
    m = float(min(vals))
    return RotheReport(float(R), m, bool(m >= -tol))


# -- solver -----------------------------------------------------------------


@dataclass
class SolveResult:
    x: np.ndarray
    residual_L: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    method: str = "relaxation"
    rothe_radius: object = None
    certificates: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        if not self.converged:
            return EXIT_NOT_CONVERGED
        cert = self.certificates
        ok = cert.get("minty_sufficient", True) and cert.get("uniqueness", True) \
            and cert.get("multistart_agree", True) is not False
        return EXIT_SOLVED if ok else EXIT_UNCERTIFIED

    def to_json(self):
        return {
            "x": [float(v) for v in self.x],
            "residual_L": self.residual_L,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "rothe_radius": self.rothe_radius,
            "certificates": self.certificates,
            "history": [float(h) for h in self.history],
            "exit_code": self.exit_code,
        }


TAU_MIN, TAU_MAX, TAU_GROW = 1e-6, 1.0, 1.25
STALL_WINDOW, STALL_FACTOR = 10, 0.5


def _newton_step(problem, x):
    F = problem.phi(x)
    J = problem.T - np.diag(problem.f.derivative(x))
    try:
        dx = np.linalg.solve(J, -F)
    except np.linalg.LinAlgError:
        dx = np.linalg.lstsq(J, -F, rcond=None)[0]
    merit = float(F @ F)
    t = 1.0
    while t > 1e-12:
        cand = x + t * dx
        Fc = problem.phi(cand)
        mc = float(Fc @ Fc)
        if np.isfinite(mc) and mc <= (1.0 - 1e-4 * t) * merit:
            return cand
        t *= 0.5
    return None


def _iterate(problem, x, tol, max_iter):
    """Damped relaxation, switching to a damped Newton step on ``Phi`` on stagnation."""
    res = problem.residual_norm(x)
    history = [res]
    tau = TAU_MAX
    method = "relaxation"
    it = 0
    while it < max_iter and res > tol:
        it += 1
        if method == "relaxation":
            cand = (1.0 - tau) * x + tau * (problem.S @ problem.f(x) + problem.g)
            with np.errstate(over="ignore", invalid="ignore"):
                ok = np.all(np.isfinite(cand))
                r_c = problem.residual_norm(cand) if ok else math.inf
            if r_c < res:
                x, res = cand, r_c
                tau = min(TAU_MAX, TAU_GROW * tau)
            else:
                tau *= 0.5
            history.append(res)
            stalled = len(history) > STALL_WINDOW and \
                history[-1] > STALL_FACTOR * history[-1 - STALL_WINDOW]
            if tau < TAU_MIN or stalled:
                method = "newton"
        else:
            cand = _newton_step(problem, x)
            if cand is None:
                history.append(res)
                break
            x = cand
            res = problem.residual_norm(x)
            history.append(res)
    return x, res, it, history, method


def solve(problem, tol=1e-10, max_iter=200, x0=None, phi=None, certify=True,
          n_starts=10, seed=0):
    """Solve ``x = S f(x) + g``.

    Relaxation ``x <- (1 - tau) x + tau (S f(x) + g)`` with ``tau`` halved on
    a residual increase and grown 1.25x on a decrease; on stagnation the
    solver switches to Newton steps on ``Phi`` with a backtracking line
    search on ``||Phi||_2^2``.  Success means the Luxemburg norm of the
    residual is at most ``tol``.  With ``certify`` the result also carries
    the Minty, Rothe and uniqueness certificates, and a multi-start
    agreement check when uniqueness is certified.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = problem.g.copy() if x0 is None else problem.space.grid_function(x0).copy()
    x, res, it, history, method = _iterate(problem, x, tol, max_iter)
    result = SolveResult(x=x, residual_L=float(res), iterations=it, converged=bool(res <= tol),
                         history=history, method=method)
    if not certify:
        return result

    cert = {"left_inverse_residual": check_left_inverse(problem.S, problem.T)}
    phi_x = problem.phi(x)
    s_phi = problem.S @ phi_x
    cert["phi_l2"] = l2_norm(problem.space, phi_x)
    cert["s_phi_l2"] = l2_norm(problem.space, s_phi)
    cert["s_phi_bound"] = float(np.linalg.norm(problem.S, 2) * np.linalg.norm(phi_x))
    cert["s_phi_within_bound"] = bool(np.linalg.norm(s_phi)
                                      <= cert["s_phi_bound"] * (1 + 1e-12) + 1e-300)
    cert["minty_sufficient"] = bool(problem.sigma >= problem.f.delta)
    cert["minty_min_inner"] = verify_minty(problem, n_pairs=200, seed=seed).min_inner
    cert["uniqueness"] = uniqueness_certificate(problem.sigma, problem.f.delta)
    if problem.f.a > 0 or not np.any(problem.f.c_values(problem.space.n)):
        try:
            R = rothe_radius(problem, phi or es.baseline_phi(), check_phi=phi is not None)
        except ValueError:
            R = None
        result.rothe_radius = R
    cert["rothe"] = result.rothe_radius is not None
    if cert["uniqueness"] and result.converged:
        agree, spread = multistart_agreement(problem, tol, max_iter, n_starts, seed)
        cert["multistart_agree"] = agree
        cert["multistart_spread"] = spread
    result.certificates = cert
    return result


def multistart_agreement(problem, tol=1e-10, max_iter=200, n_starts=10, seed=0,
                         agree_tol=1e-6):
    """Solve from random starts; largest pairwise L2 distance among converged runs."""
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(problem.g))))
    sols = []
    for _ in range(n_starts):
        x0 = rng.normal(scale=scale, size=problem.space.n)
        r = solve(problem, tol=tol, max_iter=max_iter, x0=x0, certify=False)
        if not r.converged:
            return False, math.inf
        sols.append(r.x)
    spread = max((l2_norm(problem.space, a - b) for a, b in itertools.combinations(sols, 2)),
                 default=0.0)
    return bool(spread <= agree_tol), float(spread)
