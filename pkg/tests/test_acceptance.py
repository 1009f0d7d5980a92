"""Acceptance criteria AC01-AC11, each at its pinned tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
pytest terminal summary under "acceptance criteria".
"""
import math
import time

import numpy as np
import pytest

from orlicz_lab import estimates as est
from orlicz_lab import hammerstein as hm
from orlicz_lab import nfunction as nf
from orlicz_lab.measure import MeasureSpace, indicator
from orlicz_lab.modular import char_norms, luxemburg_norm, modular, orlicz_norm
from acceptance_log import record
from cli_suite import run_suite

SEED = 20260101
START = time.perf_counter()


def space(n=64, seed=SEED):
    w = np.random.default_rng(seed).uniform(0.2, 1.0, n)
    return MeasureSpace(w / w.sum())


def test_ac01_lp_identity():
    s = space()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        M = nf.power(p)
        for _ in range(100):
            x = rng.standard_normal(64) * math.exp(rng.uniform(-3, 3))
            mod = modular(M, s, x)
            dev = abs(mod - luxemburg_norm(M, s, x) ** p) / max(mod, 1.0)
            worst = max(worst, dev)
    assert record("AC01", worst <= 1e-8, f"L_p identity, 300 samples, worst rel dev {worst:.2e}")


def test_ac02_norm_equivalence():
    s = space()
    rng = np.random.default_rng(SEED + 2)
    bad, worst_p2 = 0, 0.0
    cat = list(nf.catalog(2.0).values())
    for i in range(1000):
        M = cat[i % 5]
        x = rng.standard_normal(64) * math.exp(rng.uniform(-4, 2))
        L, A = luxemburg_norm(M, s, x), orlicz_norm(M, s, x)
        bad += not (L <= A <= 2 * L + 1e-9)
        if M.kind == "power":
            worst_p2 = max(worst_p2, abs(A - 2 * L) / max(A, 1.0))
    ok = bad == 0 and worst_p2 <= 1e-8
    assert record("AC02", ok, f"L <= A <= 2L+1e-9: {bad}/1000 violations; "
                              f"p=2 |A-2L| rel {worst_p2:.2e}")


def test_ac03_characteristic_functions():
    worst = 0.0
    for M in nf.catalog(2.0).values():
        for mu in (0.1, 1.0, 4.0):
            s = MeasureSpace([mu / 4, mu / 4, mu / 2, 1.0])
            chi, mu_d = indicator(s, [0, 1, 2])
            closed = char_norms(M, mu_d)
            for key, val in (("luxemburg", luxemburg_norm(M, s, chi)),
                             ("orlicz", orlicz_norm(M, s, chi))):
                worst = max(worst, abs(val - closed[key]) / max(1.0, closed[key]))
    assert record("AC03", worst <= 1e-8, f"indicator closed forms, worst dev {worst:.2e}")


def test_ac04_conjugation():
    v = np.geomspace(0.01, 10.0, 400)
    formula = (1 + v) * np.log1p(v) - v
    dev_conj = float(np.max(np.abs(nf.exp_minus_linear().conjugate()(v) - formula)))
    dev_num = float(np.max(np.abs(nf.exp_minus_linear().conjugate(numeric=True)(v) - formula)))

    u = np.geomspace(1e-2, 10.0, 60)
    worst_inv = 0.0
    for M in nf.catalog(2.0).values():
        twice = M.conjugate(numeric=True).conjugate(numeric=True)(u)
        worst_inv = max(worst_inv, float(np.max(np.abs(twice - M(u)) / M(u))))

    rng = np.random.default_rng(SEED + 4)
    worst_young = math.inf
    for M in nf.catalog(2.0).values():
        uu = np.exp(rng.uniform(math.log(1e-3), math.log(10.0), 2000))
        vv = np.exp(rng.uniform(math.log(1e-3), math.log(10.0), 2000))
        uu[::4] = M.deriv_inverse(vv[::4])  # equality pairs, the tight case
        slack = M(uu) + M.conjugate()(vv) - uu * vv
        worst_young = min(worst_young, float(np.min(slack)))
    ok = max(dev_conj, dev_num) <= 1e-8 and worst_inv <= 1e-6 and worst_young >= -1e-10
    assert record("AC04", ok, f"conj dev {max(dev_conj, dev_num):.2e}, involution rel "
                              f"{worst_inv:.2e}, Young min slack {worst_young:.2e} (10^4 pairs)")


def test_ac05_theorem1():
    s = space()
    rng = np.random.default_rng(SEED + 5)
    out = []
    for M in (nf.exp_minus_linear(), nf.exp_square()):
        sw = est.sweep("theorem1", M, s, est.power_phi(2), rng, 1000)
        out.append((M.name, sw.applicable, sw.violations))
    ok = all(a == 1000 and v == 0 for _, a, v in out)
    assert record("AC05", ok, "theorem 1, phi=lambda^2: " +
                  ", ".join(f"{n} {v}/{a} violations" for n, a, v in out))


def test_ac06_theorem2():
    s = space()
    rng = np.random.default_rng(SEED + 6)
    sw = est.sweep("theorem2", nf.exp_minus_linear(), s, est.exp_linear_phi(), rng, 1000, R=2.0)
    mono = est.verify_minorant(nf.exp_minus_linear(), est.exp_linear_phi())
    witnesses = all(r.witness["x_h_norm_ok"] for r in sw.reports)
    ok = sw.applicable == 1000 and sw.violations == 0 and mono.monotone_u and witnesses
    assert record("AC06", ok, f"theorem 2, R=2: {sw.violations}/{sw.applicable} violations; "
                              f"phi monotone in u: {mono.monotone_u}")


def test_ac07_small_norm_bounds_and_sandwiches():
    sandwiches = [est.sandwich_check("M1")]
    sandwiches += [est.sandwich_check(w, p) for w in ("M2", "M3") for p in (1.5, 2.0, 3.0)]
    sand_ok = all(r.passed for r in sandwiches)
    s = space()
    rng = np.random.default_rng(SEED + 7)
    sweeps = [est.sweep("theorem3", nf.entropy_like(), s, est.power_phi(2, est.SMALL), rng, 1000)]
    for p in (1.5, 2.0, 3.0):
        sweeps.append(est.sweep("theorem3", nf.power_log(p), s,
                                est.power_phi(p + 1, est.SMALL), rng, 1000))
    M = nf.entropy_like()
    sweeps.append(est.sweep("theorem4", M, s, est.ratio_phi(M, est.SMALL), rng, 1000,
                            h_fraction=0.5))
    viol = sum(w.violations for w in sweeps)
    ok = sand_ok and viol == 0 and all(w.applicable == 1000 for w in sweeps)
    assert record("AC07", ok, f"sandwiches {sum(r.passed for r in sandwiches)}/"
                              f"{len(sandwiches)} pass; theorems 3-4: {viol} violations "
                              f"over {len(sweeps)}x1000 samples")


def test_ac08_probes():
    expected = {"power": True, "entropy_like": True, "power_log": True,
                "exp_minus_linear": False, "exp_square": False}
    got = {k: nf.delta2_probe(M).verdict for k, M in nf.catalog(2.0).items()}
    c4_entropy = nf.growth_condition4_probe(nf.entropy_like()).verdict
    c4_power = nf.growth_condition4_probe(nf.power(2)).verdict
    ok = got == expected and not c4_entropy and c4_power
    assert record("AC08", ok, f"delta2 {got}; condition4 entropy_like={c4_entropy}, "
                              f"power2={c4_power}")


def test_ac09_degeneracy():
    eml = est.small_norm_degeneracy_probe(nf.exp_minus_linear(), 0.5, 20)
    p2 = est.small_norm_degeneracy_probe(nf.power(2), 0.5, 20)
    ok = min(eml.modulars) < 1e-3 and min(p2.modulars) >= 0.2499
    assert record("AC09", ok, f"exp_minus_linear min modular {min(eml.modulars):.3e}; "
                              f"power2 min modular {min(p2.modulars):.4f}")


def test_ac10_hammerstein():
    notes = []
    f = hm.Nonlinearity("cubic", {"slope": 0.0, "coef": 1.0}, delta=0.0, a=1.0, b=1.0, c=0.25)
    cubic = hm.HammersteinProblem(MeasureSpace([1.0]), nf.power(2), [[0.5]], [[2.0]], f,
                                  [1.5], 2.0)
    r = hm.solve(cubic, phi=est.power_phi(2))
    ok_cubic = (r.converged and abs(r.x[0] - 1.0) <= 1e-8 and r.residual_L <= 1e-8
                and r.iterations <= 200)
    notes.append(f"cubic x={r.x[0]:.12f} res={r.residual_L:.1e} it={r.iterations}")

    rng = np.random.default_rng(SEED + 10)
    n = 16
    w = rng.uniform(0.5, 1.5, n)
    s = MeasureSpace(w / w.sum())
    A = 0.3 * rng.standard_normal((n, n))
    T = 1.5 * np.eye(n) + A - A.T
    S = np.linalg.inv(T)
    sigma = hm.sigma_estimate(T, s)
    g = rng.standard_normal(n)
    zero = hm.HammersteinProblem(s, nf.entropy_like(), S, T, hm.Nonlinearity("zero"), g, sigma)
    rz = hm.solve(zero)
    ok_zero = float(np.max(np.abs(rz.x - g))) <= 1e-12
    notes.append(f"f=0 |x-g|={np.max(np.abs(rz.x - g)):.1e}")

    # -u f(u) = u^2 - u sin(u)/2 >= u^2/2
    fl = hm.Nonlinearity("sine", {"slope": -1.0, "amp": 0.5}, delta=-0.5, a=0.5, b=1.0,
                         c=[0.1] * n)
    prob = hm.HammersteinProblem(s, nf.power(2), S, T, fl, g, sigma)
    agree, spread = hm.multistart_agreement(prob, n_starts=10, seed=SEED)
    ok_multi = sigma - fl.delta > 0 and agree
    notes.append(f"multistart spread={spread:.1e}")

    rothe_mins = []
    for problem, phi in ((cubic, est.power_phi(2)), (prob, est.power_phi(2))):
        R = hm.rothe_radius(problem, phi)
        if R is not None:
            rothe_mins.append(hm.verify_rothe(problem, R).min_value)
    ok_rothe = len(rothe_mins) == 2 and min(rothe_mins) >= -1e-9
    notes.append(f"rothe radii={len(rothe_mins)}/2 finite, min={min(rothe_mins, default=math.nan):.2e}")

    minty = [hm.verify_minty(p).min_inner for p in (cubic, zero, prob)]
    ok_minty = min(minty) >= -1e-9
    notes.append(f"minty min={min(minty):.2e}")
    ok = ok_cubic and ok_zero and ok_multi and ok_rothe and ok_minty
    assert record("AC10", ok, "; ".join(notes))


def test_ac11_determinism(tmp_path):
    a = run_suite(tmp_path / "run1", seed=0)
    b = run_suite(tmp_path / "run2", seed=0)
    same = a == b
    nbytes = sum(len(v[1]) for v in a.values())
    assert record("AC11", same, f"{len(a)} CLI outputs, {nbytes} bytes, identical={same}")


def test_ac_runtime_budget():
    elapsed = time.perf_counter() - START
    assert record("AC--", elapsed < 60.0, f"acceptance module wall time {elapsed:.1f} s (< 60 s)")
