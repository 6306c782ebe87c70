"""The ten acceptance criteria; each prints one PASS/FAIL line in the summary."""
import math
import time

import numpy as np
import pytest

from tsmatrix import fixtures
from tsmatrix.certifier import (DomainSet, Problem, certify, check_inverse_lipschitz, check_lipschitz_left,
                                check_lipschitz_right, check_lipschitz_sigma_left, check_lipschitz_sigma_right)
from tsmatrix.cli.repro import example1_domain
from tsmatrix.curves import MatrixCurve
from tsmatrix.matrixops import Verdict, circle_minus, circle_plus, positive_definite_property_suite
from tsmatrix.solver import multiplicity_probe, residual_check, solve_explicit, solve_linear_sigma, solve_sigma
from tsmatrix.timescale import GridSpec, TimeScale
from tsmatrix.tsexp import exp_identity_suite

MIXED = fixtures.MIXED_TS
K3 = np.diag([1.0, 2.0])


def closed_form_error(tr, X):
    return max(float(np.max(np.abs(Xk - X(t)))) for t, Xk in zip(tr.times, tr.values))


def test_01_example3_closed_form(record_property):
    start = time.perf_counter()
    X = fixtures.example3_solution(K3, MIXED)
    sig = solve_sigma(fixtures.example3_field(K3, MIXED), MIXED, 0.0, 2.0, np.eye(2))
    lin = solve_linear_sigma(fixtures.example3_V(K3, MIXED), fixtures.example3_G(K3, MIXED), MIXED, 0.0, 2.0,
                             np.eye(2))
    elapsed = time.perf_counter() - start
    e_sig, e_lin = closed_form_error(sig, X), closed_form_error(lin, X)
    record_property("detail", f"sigma solver {e_sig:.2e}, linear {e_lin:.2e} (<= 1e-6), {elapsed:.2f} s (< 5 s)")
    assert e_sig <= 1e-6 and e_lin <= 1e-6 and elapsed < 5


def test_02_exponential_identities(record_property):
    nodes = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]
    diag = exp_identity_suite(MatrixCurve.const(K3), MatrixCurve.const(np.diag([0.5, -0.25])), MIXED, nodes)
    jordan = exp_identity_suite(MatrixCurve.const(np.array([[1.0, 1.0], [0.0, 1.0]])), None, MIXED, nodes)
    worst = max(max(r.residuals.values()) for r in (diag, jordan))
    scattered = max(diag.residuals["sigma"], jordan.residuals["sigma"])
    record_property("detail", f"worst residual {worst:.2e} (<= 1e-7), scattered sigma {scattered:.2e} "
                              f"(<= 1e-12), product tested: {'product' in diag.residuals}")
    for rep in (diag, jordan):
        assert {"zero", "identity", "sigma", "sigma_dense", "inverse", "semigroup", "derivative"} <= set(rep.residuals)
    assert "product" in diag.residuals and "product" not in jordan.residuals
    assert worst <= 1e-7 and scattered <= 1e-12


def test_03_example1_certificate(record_property):
    ts = TimeScale.interval(0.0, 1.0)
    start = time.perf_counter()
    good = certify("exis2", Problem(ts, fixtures.example1_bound(2.0), fixtures.example1_field(), example1_domain(),
                                    samples=500, seed=0))
    bad = certify("exis2", Problem(ts, fixtures.example1_bound(1.0), fixtures.example1_field(), example1_domain(),
                                   samples=500, seed=0))
    elapsed = time.perf_counter() - start
    witness = bad.record("partial_bound").witness
    p1 = witness["P"][0, 0]
    record_property("detail", f"L = 2I {good.verdict.value}, L = I {bad.verdict.value} with witness p1 = {p1:.4f}, "
                              f"{elapsed:.2f} s (< 10 s)")
    assert good.passed and bad.verdict is Verdict.FAIL and p1 > 0.5 and elapsed < 10


def test_04_example2_inverse_lipschitz(record_property):
    ts = TimeScale.interval(0.5, 2.0)
    P, Q = fixtures.example2_curves()
    good = check_inverse_lipschitz(P, Q, fixtures.example2_bound(ts), "left", False, ts, nodes=50)
    u = lambda t: t
    P2, Q2 = fixtures.example2_curves(u)
    bad = check_inverse_lipschitz(P2, Q2, fixtures.example2_bound(ts, u), "left", False, ts, nodes=50)
    t = bad.witness["t"]
    record_property("detail", f"u = 1 + t {good.verdict.value}, u = t {bad.verdict.value} at t = {t:.3f}")
    assert good.verdict is Verdict.PASS and bad.verdict is Verdict.FAIL and t < 1


def test_05_dense_sigma_reduction(record_property):
    ts = TimeScale.interval(0.0, 1.0)
    F, S = fixtures.example1_field(), DomainSet(2, "rectangle", 1.0)
    gaps = []
    for B in (2.5 * np.eye(2), 0.5 * np.eye(2)):
        pairs = ((check_lipschitz_left, check_lipschitz_sigma_left),
                 (check_lipschitz_right, check_lipschitz_sigma_right))
        for plain, sigma in pairs:
            a = plain(F, B, ts, S, samples=200, seed=11)
            b = sigma(F, B, ts, S, samples=200, seed=11)
            assert a.verdict is b.verdict and a.samples == b.samples == 200
            gaps.append(abs(a.margin - b.margin))
    record_property("detail", f"largest margin gap {max(gaps):.1e} (<= 1e-9) over 4 check pairs")
    assert max(gaps) <= 1e-9


def test_06_discrete_exactness(record_property):
    ts = TimeScale.integers(0, 10)
    F = fixtures.example1_clamped_field()
    worst = residual_check(solve_explicit(F, ts, 0, 10, 0.5 * np.eye(2)), F, ts)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        V0, V1, G0 = (rng.uniform(-1, 1, (2, 2)) for _ in range(3))
        V = MatrixCurve(lambda t, V0=V0, V1=V1: V0 + math.sin(t) * V1, 2)
        G = MatrixCurve(lambda t, G0=G0: G0 / (1.0 + t), 2)
        Fl = fixtures.linear_field(V, G)
        tr = solve_explicit(Fl, ts, 0, 10, rng.uniform(-1, 1, (2, 2)))
        worst = max(worst, residual_check(tr, Fl, ts))
    record_property("detail", f"largest residual {worst!r} (must be exactly 0) over 21 fields")
    assert worst == 0.0


def test_07_uniqueness_cross_check(record_property):
    p1 = multiplicity_probe(fixtures.example1_field(), "explicit", TimeScale.interval(0.0, 0.5), 0.0, 0.5,
                            np.eye(2), trials=20)
    p3 = multiplicity_probe(fixtures.example3_field(K3, MIXED), "sigma", MIXED, 0.0, 2.0, np.eye(2), trials=20)
    pn = multiplicity_probe(fixtures.scalar_nonunique(), "explicit", TimeScale.interval(0.0, 1.0), 0.0, 1.0, 0.0,
                            trials=20)
    record_property("detail", f"example1 {p1.max_distance:.1e}, example3 {p3.max_distance:.1e} (<= 1e-6); "
                              f"nonunique {pn.max_distance:.3f} (>= 0.5)")
    assert p1.max_distance <= 1e-6 and p3.max_distance <= 1e-6 and pn.max_distance >= 0.5


def test_08_positive_definite_suite(record_property):
    reps = [positive_definite_property_suite(1000, n, seed=n) for n in (2, 3, 4)]
    worst = min(r.worst_psd_margin for r in reps)
    record_property("detail", f"all eight properties on 3 x 1000 pairs: {all(r.all_passed for r in reps)}, "
                              f"worst margin {worst:.2e} (>= -1e-10)")
    assert all(r.all_passed for r in reps) and all(len(r.passed) == 8 for r in reps) and worst >= -1e-10


def test_09_regressive_algebra(record_property):
    rng = np.random.default_rng(99)
    worst_plus = worst_minus = 0.0
    accepted = rejected = 0
    while accepted < 1000:
        n = int(rng.integers(1, 5))
        A, B = rng.uniform(-2, 2, (n, n)), rng.uniform(-2, 2, (n, n))
        mu = float(rng.choice([0.0, rng.uniform(0, 2)]))
        I = np.eye(n)
        if np.linalg.cond(I + mu * A) > 1e6:
            rejected += 1
            continue
        accepted += 1
        rhs = (I + mu * A) @ (I + mu * B)
        worst_plus = max(worst_plus, np.max(np.abs(I + mu * circle_plus(A, B, mu) - rhs)) / max(1, np.max(np.abs(rhs))))
        inv = np.linalg.inv(I + mu * A)
        worst_minus = max(worst_minus, np.max(np.abs(I + mu * circle_minus(A, mu) - inv)) / max(1, np.max(np.abs(inv))))
    record_property("detail", f"plus {worst_plus:.1e}, minus {worst_minus:.1e} (<= 1e-9) on 1000 triples, "
                              f"{rejected} ill-conditioned draws skipped")
    assert worst_plus <= 1e-9 and worst_minus <= 1e-9


def test_10_grid_convergence(record_property):
    F, ts = fixtures.example1_field(), TimeScale.interval(0.0, 0.5)
    r = [residual_check(solve_explicit(F, ts, 0.0, 0.5, np.eye(2), GridSpec(h)), F, ts) for h in (2e-3, 1e-3)]
    ratio = r[0] / r[1]
    record_property("detail", f"residual {r[0]:.2e} -> {r[1]:.2e}, ratio {ratio:.1f} (>= 8)")
    assert ratio >= 8
