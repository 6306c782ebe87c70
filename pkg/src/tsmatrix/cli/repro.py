"""End-to-end reproduction of the three worked examples with pass/fail lines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import fixtures
from ..certifier import DomainSet, Problem, certify, check_inverse_lipschitz
from ..matrixops import Verdict
from ..solver import multiplicity_probe, solve_linear_sigma, solve_sigma
from ..timescale import GridSpec, TimeScale


@dataclass
class Outcome:
    name: str
    ok: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def example1_domain():
    """tr(P^T P) <= 2 restricted to matrices [[p1, c], [c, p1]]."""
    return DomainSet(2, "rectangle", math.sqrt(2.0), structure="bisymmetric")


def example1(samples=500, seed=0, grid=GridSpec()):
    ts = TimeScale.interval(0.0, 1.0)
    F = fixtures.example1_field()
    out = []
    rep = certify("exis2", Problem(ts, fixtures.example1_bound(2.0), F, example1_domain(), samples=samples,
                                   seed=seed, grid=grid))
    out.append(Outcome("example1 certificate (L = 2I)", rep.passed, f"verdict {rep.verdict.value}"))
    bad = certify("exis2", Problem(ts, fixtures.example1_bound(1.0), F, example1_domain(), samples=samples,
                                   seed=seed, grid=grid))
    rec = bad.record("partial_bound")
    p1 = rec.witness["P"][0, 0] if rec.witness else float("nan")
    out.append(Outcome("example1 mutation (L = I) rejected", bad.verdict is Verdict.FAIL and p1 > 0.5,
                       f"verdict {bad.verdict.value}, witness p1 = {p1:.4f}"))
    probe = multiplicity_probe(F, "explicit", TimeScale.interval(0.0, 0.5), 0.0, 0.5, np.eye(2), grid,
                               trials=20, seed=seed)
    out.append(Outcome("example1 probe", probe.max_distance <= 1e-6,
                       f"max pairwise distance {probe.max_distance:.3e}"))
    return out


def example2(nodes=50, grid=GridSpec()):
    ts = TimeScale.interval(0.5, 2.0)
    out = []
    for label, u, want in (("u = 1 + t", lambda t: 1.0 + t, Verdict.PASS), ("u = t", lambda t: t, Verdict.FAIL)):
        P, Q = fixtures.example2_curves(u)
        rec = check_inverse_lipschitz(P, Q, fixtures.example2_bound(ts, u), "left", False, ts, nodes, grid=grid)
        ok = rec.verdict is want
        detail = f"verdict {rec.verdict.value}"
        if want is Verdict.FAIL:
            t = rec.witness["t"] if rec.witness else float("nan")
            ok = ok and t < 1.0
            detail += f", witness t = {t:.4f}"
        out.append(Outcome(f"example2 inverse Lipschitz ({label})", ok, detail))
    return out


def example3(samples=500, seed=0, grid=GridSpec()):
    ts = fixtures.MIXED_TS
    K = np.diag([1.0, 2.0])
    F = fixtures.example3_field(K, ts)
    X = fixtures.example3_solution(K, ts)
    out = []
    sig = solve_sigma(F, ts, 0.0, 2.0, np.eye(2), grid)
    lin = solve_linear_sigma(fixtures.example3_V(K, ts), fixtures.example3_G(K, ts), ts, 0.0, 2.0, np.eye(2), grid)
    for name, tr in (("sigma solver", sig), ("linear closed form", lin)):
        err = max(float(np.max(np.abs(Xk - X(t)))) for t, Xk in zip(tr.times, tr.values))
        out.append(Outcome(f"example3 {name}", err <= 1e-6, f"max |X_numeric - X_closed| = {err:.3e}"))
    domain = DomainSet(2, "strip", 5.0, structure="diagonal")
    rep = certify("exis3", Problem(ts, fixtures.example3_bound(K, ts), F, domain, samples=samples, seed=seed,
                                   grid=grid))
    out.append(Outcome("example3 certificate (B = 2K)", rep.passed, f"verdict {rep.verdict.value}"))
    probe = multiplicity_probe(F, "sigma", ts, 0.0, 2.0, np.eye(2), grid, trials=20, seed=seed)
    out.append(Outcome("example3 probe", probe.max_distance <= 1e-6,
                       f"max pairwise distance {probe.max_distance:.3e}"))
    return out


EXAMPLES = {"example1": example1, "example2": example2, "example3": example3}
