import math

import numpy as np
import pytest

from orlicz_lab import estimates as est
from orlicz_lab import hammerstein as hm
from orlicz_lab import nfunction as nf
from orlicz_lab.measure import MeasureSpace


def cubic_problem():
    # x + x^3/2 = 1.5 has the single real root x = 1; -u f(u) = u^4 >= u^2 - 1/4
    f = hm.Nonlinearity("cubic", {"slope": 0.0, "coef": 1.0}, delta=0.0, a=1.0, b=1.0, c=0.25)
    return hm.HammersteinProblem(MeasureSpace([1.0]), nf.power(2), [[0.5]], [[2.0]], f, [1.5], 2.0)


def diag_problem(n, rng, f, sigma_shift=2.0, g=None, M=None):
    w = rng.uniform(0.5, 1.5, n)
    space = MeasureSpace(w / w.sum())
    A = rng.standard_normal((n, n)) * 0.2
    T = sigma_shift * np.eye(n) + (A - A.T)
    S = np.linalg.inv(T)
    sigma = hm.sigma_estimate(T, space, n_samples=0)
    g = rng.standard_normal(n) if g is None else g
    return hm.HammersteinProblem(space, M or nf.power(2), S, T, f, g, sigma)


def test_left_inverse_examples():
    assert hm.check_left_inverse(0.5 * np.eye(3), 2 * np.eye(3)) == 0.0
    assert hm.check_left_inverse(np.diag([1.0, 2.0]), np.diag([1.0, 0.5])) == 0.0
    T = np.eye(2) + 1e-6 * np.array([[0, 1], [1, 0]])
    assert hm.check_left_inverse(np.eye(2), T) == pytest.approx(1e-6, rel=1e-9)
    with pytest.raises(ValueError):
        hm.check_left_inverse(np.eye(2), np.eye(3))


def test_sigma_examples():
    s2 = MeasureSpace([1.0, 1.0])
    assert hm.sigma_estimate(2 * np.eye(2), s2) == pytest.approx(2.0, rel=1e-12)
    assert hm.sigma_estimate(np.diag([1.0, 3.0]), s2) == pytest.approx(1.0, rel=1e-12)
    skew = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert hm.sigma_estimate(skew, s2) == pytest.approx(0.0, abs=1e-12)


def test_sigma_is_a_lower_bound_with_weights(rng):
    space = MeasureSpace(rng.uniform(0.1, 3.0, 7))
    T = rng.standard_normal((7, 7))
    sigma = hm.sigma_estimate(T, space)
    X = rng.standard_normal((2000, 7))
    q = np.einsum("ij,ij->i", (X @ T.T) * space.weights, X) / ((X * X) @ space.weights)
    assert q.min() >= sigma - 1e-9
    assert q.min() - sigma < 0.5  # the bound is attained along an eigenvector


def test_uniqueness_examples():
    assert hm.uniqueness_certificate(2.0, 0.0)
    assert not hm.uniqueness_certificate(1.0, 1.0)
    with pytest.raises(ValueError):
        hm.uniqueness_certificate(math.nan, 0.0)


def test_cubic_solves_to_one():
    r = hm.solve(cubic_problem())
    assert r.converged and r.exit_code == 0
    assert r.x[0] == pytest.approx(1.0, abs=1e-9)
    assert r.residual_L <= 1e-8 and r.iterations <= 200
    assert r.certificates["uniqueness"] and r.certificates["multistart_agree"]
    assert r.certificates["multistart_spread"] <= 1e-6


def test_zero_nonlinearity_returns_g(rng):
    p = diag_problem(8, rng, hm.Nonlinearity("zero"))
    r = hm.solve(p)
    assert r.iterations <= 1
    np.testing.assert_allclose(r.x, p.g, rtol=0, atol=1e-14)


def test_linear_matches_direct_solve(rng):
    delta = 0.7
    p = diag_problem(16, rng, hm.Nonlinearity("linear", {"slope": delta}, delta=delta))
    assert p.sigma - delta > 0
    r = hm.solve(p)
    direct = np.linalg.solve(np.eye(16) - delta * p.S, p.g)
    assert np.max(np.abs(r.x - direct)) <= 1e-8
    assert r.certificates["multistart_agree"]


def test_minty_examples():
    p = cubic_problem()
    rep = hm.verify_minty(p)
    assert rep.passed and rep.sigma_ge_delta and rep.min_inner >= 0
    eq = hm.HammersteinProblem(MeasureSpace([1.0]), nf.power(2), [[0.5]], [[2.0]],
                               hm.Nonlinearity("linear", {"slope": 2.0}, delta=2.0), [0.0], 2.0)
    assert abs(hm.verify_minty(eq).min_inner) <= 1e-12
    bad = hm.HammersteinProblem(MeasureSpace([1.0]), nf.power(2), [[1.0]], [[1.0]],
                                hm.Nonlinearity("linear", {"slope": 3.0}, delta=3.0), [0.0], 1.0)
    rep = hm.verify_minty(bad)
    assert rep.min_inner < 0 and not rep.sigma_ge_delta and not rep.passed


def test_minty_holds_whenever_sigma_ge_delta(rng):
    for delta in [0.0, 0.5, 1.5]:
        f = hm.Nonlinearity("sine", {"slope": -1.0, "amp": 0.4}, delta=-0.6)
        p = diag_problem(10, rng, f, sigma_shift=1.0 + delta)
        assert p.sigma >= f.delta
        assert hm.verify_minty(p, n_pairs=300, seed=3).min_inner >= -1e-9


def test_nonlinearity_certificates():
    f = cubic_problem().f
    assert f.check_delta(3) <= 0
    assert f.check_coercivity(nf.power(2), 3) <= 1e-12
    wrong = hm.Nonlinearity("cubic", {"coef": 1.0}, a=1.0, b=1.0, c=0.0)
    assert wrong.check_coercivity(nf.power(2), 1) > 0
    with pytest.raises(ValueError):
        hm.Nonlinearity("zero", a=-1.0)
    with pytest.raises(ValueError):
        hm.Nonlinearity("tanh")


def test_custom_callable_derivative():
    f = hm.Nonlinearity(func=lambda u, cells: -u**3 * (1 + cells))
    u = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(f.derivative(u), -3 * u**2 * np.arange(1, 4), rtol=1e-6)


def test_rothe_trivial_radius():
    p = hm.HammersteinProblem(MeasureSpace([0.5, 0.5]), nf.power(2), 0.5 * np.eye(2),
                              2 * np.eye(2), hm.Nonlinearity("zero"), [0.0, 0.0], 2.0)
    assert hm.rothe_radius(p, est.baseline_phi()) == 1.0
    rep = hm.verify_rothe(p, 3.0)
    assert rep.passed and rep.min_value > 0


def test_rothe_cubic_radius_passes():
    p = cubic_problem()
    R = hm.rothe_radius(p, est.power_phi(2))
    assert R is not None and 1.0 <= R < 10.0
    E = hm.rothe_lower_bound(p, est.power_phi(2), 0.0)
    assert E(R) >= 0 and E(R * (1 - 1e-9)) < 0
    assert hm.verify_rothe(p, R).min_value >= -1e-9


def test_rothe_exp_minus_linear_bisection_oracle():
    from scipy.optimize import brentq

    space = MeasureSpace([0.5, 0.5])
    M = nf.exp_minus_linear()
    f = hm.Nonlinearity("cubic", {"coef": 1.0}, a=1.0, b=1.0, c=0.0)
    T = np.eye(2)
    p = hm.HammersteinProblem(space, M, T, T, f, [0.3, -0.2], 0.0)
    R = hm.rothe_radius(p, est.power_phi(2), check_phi=False)
    tg = hm.luxemburg_norm(M.conjugate(), space, p.Tg)
    assert R == pytest.approx(brentq(lambda r: r - 2 * tg, 1e-9, 10) if 2 * tg > 1 else 1.0,
                              rel=1e-9)


def test_rothe_baseline_with_negative_sigma_is_none():
    space = MeasureSpace([0.5, 0.5])
    T = np.diag([-0.5, 1.0])
    p = hm.HammersteinProblem(space, nf.power(2), np.linalg.inv(T), T,
                              hm.Nonlinearity("linear", {"slope": -1.0}, a=1.0), [1.0, 1.0], -0.5)
    assert hm.rothe_radius(p, est.baseline_phi(), gamma=1.0) is None


def test_rothe_negative_sigma_with_growth(rng):
    # power 2: Luxemburg = L2, so the embedding constant is exactly 1
    space = MeasureSpace([0.25] * 4)
    T = np.diag([-0.3, 1.0, 1.0, 1.0])
    f = hm.Nonlinearity("cubic", {"coef": 1.0}, a=1.0, b=1.0, c=0.25)
    p = hm.HammersteinProblem(space, nf.power(2), np.linalg.inv(T), T, f,
                              rng.standard_normal(4) * 0.1, -0.3)
    R = hm.rothe_radius(p, est.PhiMinorant("lambda^2 large", 1, lambda t: np.asarray(t) ** 2,
                                           est.LARGE), gamma=1.0, check_phi=False)
    assert R is not None and hm.verify_rothe(p, R).passed


def test_rothe_adversarial_g_fails():
    space = MeasureSpace([1.0])
    p = hm.HammersteinProblem(space, nf.power(2), [[1.0]], [[1.0]], hm.Nonlinearity("zero"),
                              [100.0], 1.0)
    rep = hm.verify_rothe(p, 1.0)
    assert rep.min_value < 0 and not rep.passed


def test_rothe_rejects_wrong_phi():
    with pytest.raises(ValueError):
        hm.rothe_radius(cubic_problem(), est.exp_linear_phi())
    with pytest.raises(ValueError):
        hm.rothe_radius(cubic_problem(), est.power_phi(5))  # not a minorant of u^2


def test_not_converging_reports_exit_3():
    space = MeasureSpace([1.0])
    f = hm.Nonlinearity("sine", {"slope": 1.0, "amp": 1.0}, delta=2.0)
    p = hm.HammersteinProblem(space, nf.power(2), [[1.0]], [[1.0]], f, [2.5], 1.0)
    r = hm.solve(p, max_iter=200)
    assert not r.converged and r.exit_code == 3
    assert len(r.history) >= 2


def test_uncertified_exit_2():
    # sigma < delta, yet the linear system is solvable
    space = MeasureSpace([1.0])
    f = hm.Nonlinearity("linear", {"slope": 2.0}, delta=2.0)
    p = hm.HammersteinProblem(space, nf.power(2), [[1.0]], [[1.0]], f, [1.0], 1.0)
    r = hm.solve(p)
    assert r.converged and r.x[0] == pytest.approx(-1.0, abs=1e-9)
    assert r.exit_code == 2


def test_problem_json_roundtrip():
    p = cubic_problem()
    q = hm.HammersteinProblem.from_json(p.to_json())
    assert q.to_json() == p.to_json()
    assert hm.solve(q, certify=False).x[0] == pytest.approx(1.0, abs=1e-9)


def test_validate_report():
    v = cubic_problem().validate()
    assert v["left_inverse_residual"] == 0.0 and v["sigma_valid"]
    assert v["delta_gap"] <= 0 and v["coercivity_gap"] <= 1e-12
