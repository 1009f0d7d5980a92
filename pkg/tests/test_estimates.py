import math

import numpy as np
import pytest

from orlicz_lab import estimates as est
from orlicz_lab import nfunction as nf
from orlicz_lab.measure import MeasureSpace

U_STAR = 1.1461932206205825


def test_theorem1_example():
    rep = est.theorem1_bound(nf.exp_minus_linear(), MeasureSpace([1.0]), [2.0], est.power_phi(2))
    assert rep.applicable and rep.passed
    assert rep.norm == pytest.approx(2.0 / U_STAR, rel=1e-9)
    assert rep.actual == pytest.approx(math.exp(2) - 3, rel=1e-12)
    assert rep.bound_value == pytest.approx((2.0 / U_STAR) ** 2, rel=1e-9)


def test_theorem1_not_applicable_below_one():
    rep = est.theorem1_bound(nf.power(2), MeasureSpace([1.0]), [0.5], est.power_phi(2))
    assert not rep.applicable and math.isnan(rep.bound_value)


def test_theorem2_example():
    # one unit cell: ||1|| = 1/u*, h = 1/2 * u*, and phi at (||x||/2, h)
    M = nf.exp_minus_linear()
    x = [3 * U_STAR]
    rep = est.theorem2_bound(M, MeasureSpace([1.0]), x, est.exp_linear_phi(), R=2.0)
    assert rep.passed and rep.witness["x_h_norm_ok"]
    assert rep.norm == pytest.approx(3.0, rel=1e-9)
    assert rep.witness["h"] == pytest.approx(U_STAR / 2, rel=1e-9)
    assert rep.actual == pytest.approx(26.70411392312458, rel=1e-10)
    assert rep.bound_value == pytest.approx(2.505185034603932, rel=1e-8)


def test_theorem2_r_validation():
    M, s = nf.exp_minus_linear(), MeasureSpace([1.0])
    with pytest.raises(ValueError):
        est.theorem2_bound(M, s, [5.0], est.exp_linear_phi(), R=1.0)
    rep = est.theorem2_bound(M, s, [5.0], est.exp_linear_phi(), R=1.0, allow_r_one=True)
    assert rep.passed


def test_theorem4_h_range():
    M, s = nf.entropy_like(), MeasureSpace([0.5, 0.5])
    n1 = est.unit_norm(M, s)
    with pytest.raises(ValueError):
        est.theorem4_bound(M, s, [0.1, 0.2], est.ratio_phi(M, est.SMALL), 1.0 / n1)


def test_wrong_phi_kind_rejected():
    with pytest.raises(ValueError):
        est.theorem1_bound(nf.power(2), MeasureSpace([1.0]), [2.0], est.exp_linear_phi())
    with pytest.raises(ValueError):
        est.PhiMinorant("x", 3, lambda t: t, est.LARGE)


@pytest.mark.parametrize("M,phi", [
    (nf.exp_minus_linear(), est.power_phi(2)),
    (nf.exp_square(), est.power_phi(2)),
    (nf.power(3), est.power_phi(3)),
    (nf.exp_minus_linear(), est.exp_linear_phi()),
    (nf.exp_square(), est.exp_square_phi()),
    (nf.entropy_like(), est.power_phi(2, est.SMALL)),
    (nf.power_log(2), est.power_phi(3, est.SMALL)),
    (nf.entropy_like(), est.baseline_phi()),
])
def test_valid_minorants(M, phi):
    assert est.verify_minorant(M, phi).passed


def test_invalid_minorants_are_caught():
    rep = est.verify_minorant(nf.exp_minus_linear(), est.power_phi(3))
    assert not rep.passed and rep.worst_violation > 0
    rep = est.verify_minorant(nf.entropy_like(), est.power_phi(1.99, est.SMALL))
    assert not rep.passed and rep.worst_u == pytest.approx(1e-6)


def test_exp_linear_phi_monotone_in_u():
    rep = est.verify_minorant(nf.exp_minus_linear(), est.exp_linear_phi())
    assert rep.monotone_u and rep.monotone_lambda


def test_exp_linear_phi_limit_at_zero():
    phi = est.exp_linear_phi()
    assert float(phi(3.0, 0.0)) == 9.0
    assert float(phi(3.0, 1e-7)) == pytest.approx(9.0, rel=1e-6)


def test_phi_from_json():
    assert est.phi_from_json({"kind": "power", "k": 2}).name == "lambda^2"
    with pytest.raises(ValueError):
        est.phi_from_json({"kind": "ratio"})
    with pytest.raises(ValueError):
        est.phi_from_json({"kind": "cosh"})


def test_sample_with_norms_hits_targets(space64, rng):
    M = nf.entropy_like()
    X, norms = est.sample_with_norms(M, space64, rng, 30, 0.5, 2.0)
    assert X.shape == (30, 64)
    assert np.all((norms > 0.5 * (1 - 1e-9)) & (norms < 2.0 * (1 + 1e-9)))


@pytest.mark.parametrize("theorem,M,phi,kw", [
    ("theorem1", nf.exp_square(), est.power_phi(2), {}),
    ("theorem2", nf.exp_minus_linear(), est.exp_linear_phi(), {"R": 2.0}),
    ("theorem3", nf.power_log(1.5), est.power_phi(2.5, est.SMALL), {}),
    ("theorem4", nf.entropy_like(), est.ratio_phi(nf.entropy_like(), est.SMALL), {}),
])
def test_small_sweeps(theorem, M, phi, kw, space64, rng):
    s = est.sweep(theorem, M, space64, phi, rng, 60, **kw)
    assert s.applicable == 60 and s.violations == 0 and s.passed


def test_sweep_exposes_bad_minorant(space64, rng):
    s = est.sweep("theorem1", nf.exp_minus_linear(), space64, est.power_phi(3), rng, 200)
    assert s.violations > 0


@pytest.mark.parametrize("which", ["M1", "M2", "M3"])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_sandwiches(which, p):
    assert est.sandwich_check(which, p).passed


def test_sandwich_grid_validation():
    with pytest.raises(ValueError):
        est.sandwich_check("M1", lam_grid=[0.5, 1.0])
    with pytest.raises(ValueError):
        est.sandwich_check("M4")
    with pytest.raises(ValueError):
        est.sandwich_check("M2", p=1.0)


def test_sandwich_margins_are_real():
    # the upper bound lam^1 is strict for entropy_like away from u = 0
    rep = est.sandwich_check("M1", lam_grid=[0.5], u_grid=np.logspace(0, 3, 20))
    assert rep.worst_upper < -1e-3


def test_degeneracy_probe():
    rep = est.small_norm_degeneracy_probe(nf.exp_minus_linear(), 0.5, 20)
    assert rep.passed and min(rep.modulars) < 1e-3
    assert max(rep.norm_errors) < 1e-8
    stable = est.small_norm_degeneracy_probe(nf.power(2), 0.5, 20)
    assert not stable.passed
    assert min(stable.modulars) >= 0.2499
    with pytest.raises(ValueError):
        est.small_norm_degeneracy_probe(nf.power(2), 1.5)
