"""Sampled checks of the hypotheses behind the non-multiplicity results.

Every check draws seeded samples ``(t, P, Q)`` with ``t`` in T^kappa and
``P > Q`` inside a declared domain set, evaluates a Loewner-order margin and
keeps the worst one together with its witness.  A passing certificate is
evidence that the hypotheses hold on the samples, not a proof.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import MatrixCurve, MatrixField, as_matrix
from .matrixops import (DEFAULT_TOL, Tolerances, Verdict, circle_minus, classify, is_invertible,
                        max_abs, min_sym_eig, random_pd)
from .timescale import GridSpec, TimeScale, delta_derivative
from .tsexp import exp_ode

EVIDENCE_NOTE = ("sampled evidence, not a proof: each hypothesis was checked only on the "
                 "reported number of random samples")

KINDS = ("rectangle", "strip", "pd_cone", "custom")
STRUCTURES = ("general", "symmetric", "diagonal", "bisymmetric")


# -- domain sets ---------------------------------------------------------------

def structure_basis(n, structure):
    """Orthonormal (Frobenius) basis of the structured matrix subspace."""
    basis = []
    if structure == "general":
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n))
                E[i, j] = 1.0
                basis.append(E)
        return basis
    if structure in ("symmetric", "diagonal"):
        for i in range(n):
            for j in range(i, n if structure == "symmetric" else i + 1):
                E = np.zeros((n, n))
                E[i, j] = E[j, i] = 1.0
                basis.append(E / np.linalg.norm(E))
        return basis
    if structure == "bisymmetric":
        # symmetric and centrosymmetric: invariant under the exchange J P J
        J = np.eye(n)[::-1]
        seen = []
        for E in structure_basis(n, "symmetric"):
            M = 0.5 * (E + J @ E @ J)
            for B in seen:
                M = M - np.sum(M * B) * B
            if np.linalg.norm(M) > 1e-12:
                M = M / np.linalg.norm(M)
                seen.append(M)
        return seen
    raise ValueError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")


def project_structure(M, structure):
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if structure == "general":
        return M.copy()
    S = 0.5 * (M + M.T)
    if structure == "symmetric":
        return S
    if structure == "diagonal":
        return np.diag(np.diag(M))
    if structure == "bisymmetric":
        J = np.eye(n)[::-1]
        return 0.5 * (S + J @ S @ J)
    raise ValueError(f"unknown structure {structure!r}")


@dataclass(frozen=True)
class DomainSet:
    """The set S of admissible matrix states.

    ``rectangle``: ``||P - center||_F <= radius``; ``strip``:
    ``max |p_ij - c_ij| <= radius`` (unbounded in t); ``pd_cone``: symmetric
    positive definite matrices, sampled with eigenvalues up to ``radius``;
    ``custom``: user-supplied ``sampler(rng)`` and ``contains(P)``.  Samples
    always lie in the ``structure`` subspace, which must contain ``center``.
    """

    n: int
    kind: str = "rectangle"
    radius: float = 1.0
    center: Optional[np.ndarray] = None
    structure: str = "general"
    sampler: Optional[Callable] = field(default=None, compare=False)
    contains_fn: Optional[Callable] = field(default=None, compare=False)
    boundary_fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}; expected one of {STRUCTURES}")
        if not self.radius > 0:
            raise ValueError("domain radius must be positive")
        c = np.zeros((self.n, self.n)) if self.center is None else as_matrix(self.center, self.n)
        if max_abs(project_structure(c, self.structure) - c) > 1e-12:
            raise ValueError(f"center is not {self.structure}")
        object.__setattr__(self, "center", c)
        if self.kind == "custom" and (self.sampler is None or self.contains_fn is None):
            raise ValueError("custom domain sets need both sampler and contains_fn")

    def contains(self, P, slack=1e-12) -> bool:
        P = np.asarray(P, dtype=float)
        if self.kind == "custom":
            return bool(self.contains_fn(P))
        if self.kind == "pd_cone":
            return max_abs(P - P.T) <= slack and min_sym_eig(P) > 0
        D = P - self.center
        size = np.linalg.norm(D) if self.kind == "rectangle" else max_abs(D)
        return size <= self.radius * (1 + slack)

    def _basis(self):
        return structure_basis(self.n, self.structure)

    def sample(self, rng, boundary=False) -> np.ndarray:
        if self.kind == "custom":
            return np.asarray(self.sampler(rng), dtype=float)
        basis = self._basis()
        if self.kind == "pd_cone":
            R = self.structured_pd(rng)
            return self.radius * rng.uniform(0.05, 1.0) * R / max_abs(R)
        c = rng.standard_normal(len(basis))
        c /= np.linalg.norm(c)
        M = sum(ci * E for ci, E in zip(c, basis))
        scale = 1.0 if boundary else rng.uniform() ** (1.0 / len(basis))
        size = np.linalg.norm(M) if self.kind == "rectangle" else max_abs(M)
        return self.center + self.radius * scale / size * M

    def structured_pd(self, rng) -> np.ndarray:
        """Random PD matrix in the structure subspace (projection preserves definiteness)."""
        R = project_structure(random_pd(rng, self.n), self.structure)
        if self.structure == "general":
            R = 0.5 * (R + R.T)
        return R


def _max_step(S, Q, R, iters=60):
    """Largest d with Q + d R in S (S convex, Q in S), found by bisection."""
    if S.kind == "pd_cone":
        return S.radius
    lo, hi = 0.0, 1.0
    while S.contains(Q + hi * R) and hi < 1e6:
        lo, hi = hi, 2 * hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if S.contains(Q + mid * R):
            lo = mid
        else:
            hi = mid
    return lo


def sample_ordered_pair(S: DomainSet, rng, tol=DEFAULT_TOL, retries=20, boundary=False):
    """Draw Q in S and P = Q + d R in S with R structured PD, so that P > Q.

    Returns ``None`` when no admissible pair was found within ``retries``.
    """
    for _ in range(retries):
        Q = S.sample(rng)
        R = S.structured_pd(rng)
        R = R / max_abs(R)
        dmax = _max_step(S, Q, R)
        if dmax <= 0:
            continue
        d = dmax if boundary else dmax * rng.uniform(0.05, 1.0)
        P = Q + d * R
        if S.contains(P) and classify(min_sym_eig(P - Q), max(max_abs(P), max_abs(Q)), tol, strict=True) is Verdict.PASS:
            return P, Q
    return None


# -- records -------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


@dataclass
class CheckRecord:
    condition: str
    verdict: Verdict
    margin: Optional[float] = None
    samples: int = 0
    witness: Optional[dict] = None
    note: str = ""
    required: bool = True

    def to_dict(self):
        return {"condition": self.condition, "verdict": self.verdict.value,
                "margin": _jsonable(self.margin), "samples": self.samples,
                "witness": _jsonable(self.witness), "note": self.note, "required": self.required}


@dataclass
class CertificateReport:
    theorem: str
    records: list
    parameters: dict = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        req = [r.verdict for r in self.records if r.required]
        if all(v in (Verdict.PASS, Verdict.ASSUMED) for v in req):
            return Verdict.PASS
        if Verdict.FAIL in req:
            return Verdict.FAIL
        return Verdict.INDETERMINATE

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def record(self, condition) -> CheckRecord:
        for r in self.records:
            if r.condition == condition:
                return r
        raise KeyError(condition)

    def to_dict(self):
        return {"format_version": 1, "theorem": self.theorem, "verdict": self.verdict.value,
                "evidence_note": EVIDENCE_NOTE, "parameters": _jsonable(self.parameters),
                "records": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        rows = [("condition", "verdict", "margin", "samples", "note")]
        for r in self.records:
            m = "-" if r.margin is None else f"{r.margin:.3e}"
            rows.append((r.condition, r.verdict.value, m, str(r.samples), r.note))
        widths = [max(len(row[i]) for row in rows) for i in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row[:4], widths)) + "  " + row[4] for row in rows]
        lines.append(f"overall: {self.verdict.value} ({self.theorem}); {EVIDENCE_NOTE}")
        return "\n".join(lines)


# -- evaluation helpers ---------------------------------------------------------

def as_curve(B, n=None) -> MatrixCurve:
    if isinstance(B, MatrixCurve):
        return B
    if callable(B):
        return MatrixCurve.from_function(B, n)
    return MatrixCurve.const(B)


def _at(C, t, mu):
    return np.asarray(C(t, mu) if C.mu_aware else C(t), dtype=float)


def _field(F, t, P, mu):
    return np.asarray(F(t, P, mu) if F.mu_aware else F(t, P), dtype=float)


def _scale(*Ms):
    return max(1.0, *(max_abs(M) for M in Ms))


class _Worst:
    """Keeps the worst sample: any failure beats any pass, then the smallest relative margin."""

    def __init__(self):
        self.failed = False
        self.rel = math.inf
        self.margin = math.inf
        self.witness = None

    def offer(self, verdict, margin, scale, witness):
        fail = verdict is Verdict.FAIL
        rel = margin / scale
        if (fail and not self.failed) or (fail == self.failed and rel < self.rel):
            self.failed = self.failed or fail
            self.rel, self.margin = rel, margin
            self.witness = witness() if callable(witness) else witness


def kappa_nodes(ts: TimeScale, grid: GridSpec = GridSpec(), a=None, b=None) -> np.ndarray:
    """Grid nodes of [a, b]_T intersected with T^kappa."""
    a = ts.min if a is None else a
    b = ts.max if b is None else b
    sub = ts.restrict(a, b)
    return sub.kappa().grid(grid).times


class _NodeSampler:
    """Draws nodes of T^kappa, hitting right-scattered points half of the time."""

    def __init__(self, ts, grid, a, b, rng):
        self.ts = ts
        self.rng = rng
        nodes = kappa_nodes(ts, grid, a, b)
        self.scattered = [t for t in nodes if ts.mu(t) > 0]
        self.all = nodes

    def __call__(self):
        if self.scattered and self.rng.uniform() < 0.5:
            return float(self.scattered[self.rng.integers(len(self.scattered))])
        return float(self.all[self.rng.integers(len(self.all))])


# margin functions: exported so that a witness can be replayed standalone

def lipschitz_left_margin(F, B, t, P, Q, mu):
    """lambda_min of sym(B(t)(P - Q) - (F(t,P) - F(t,Q))); >= 0 means the inequality holds."""
    M = _at(as_curve(B), t, mu) @ (P - Q) - (_field(F, t, P, mu) - _field(F, t, Q, mu))
    return min_sym_eig(M), _scale(M, P, Q)


def lipschitz_right_margin(F, C, t, P, Q, mu):
    M = (P - Q) @ _at(as_curve(C), t, mu) - (_field(F, t, P, mu) - _field(F, t, Q, mu))
    return min_sym_eig(M), _scale(M, P, Q)


def _neg_circle_minus(B, mu, tol):
    return -circle_minus(B, mu, tol)


def lipschitz_sigma_left_margin(F, B, t, P, Q, mu, tol=DEFAULT_TOL):
    """Margin of F(t,P) - F(t,Q) <= -(-)B(t) (P - Q), with -(-)B = (I + mu B)^{-1} B."""
    W = _neg_circle_minus(_at(as_curve(B), t, mu), mu, tol)
    M = W @ (P - Q) - (_field(F, t, P, mu) - _field(F, t, Q, mu))
    return min_sym_eig(M), _scale(M, P, Q)


def lipschitz_sigma_right_margin(F, C, t, P, Q, mu, tol=DEFAULT_TOL):
    W = _neg_circle_minus(_at(as_curve(C), t, mu), mu, tol)
    M = (P - Q) @ W - (_field(F, t, P, mu) - _field(F, t, Q, mu))
    return min_sym_eig(M), _scale(M, P, Q)


def partial_bound_margin(F, L, t, P, mu):
    """min over (i, j) of lambda_min(sym(L - dF/dp_ij)) and the minimising index."""
    L = as_matrix(L)
    J = F.jacobian(t, P, mu)
    best, where = math.inf, None
    n = L.shape[0]
    for i in range(n):
        for j in range(n):
            m = min_sym_eig(L - J[i, j])
            if m < best:
                best, where = m, (i, j)
    return best, where, _scale(L, J)


def inverse_lipschitz_margin(P_curve, Q_curve, B, ts, t, side="left", sigma_form=False,
                             h=1e-5, tol=DEFAULT_TOL):
    """Margins of the inverse Lipschitz inequality at t.

    Returns ``(margin, scale, pre_margin, pre_scale)`` where ``pre_margin`` is
    the smaller relative definiteness margin of P - Q and P^Delta - Q^Delta.
    """
    mu = ts.mu(t)
    D = _at(P_curve, t, mu) - _at(Q_curve, t, mu)
    Dd = delta_derivative(P_curve, ts, t, h) - delta_derivative(Q_curve, ts, t, h)
    pre = min(min_sym_eig(D) / _scale(D), min_sym_eig(Dd) / _scale(Dd))
    if not (is_invertible(D, tol) and is_invertible(Dd, tol)):
        return None, 1.0, pre, 1.0
    Bt = _at(as_curve(B), t, mu)
    if sigma_form:
        Bt = _neg_circle_minus(Bt, mu, tol)
    Ddi = np.linalg.inv(Dd)
    rhs = Ddi @ Bt if side == "left" else Bt @ Ddi
    M = rhs - np.linalg.inv(D)
    return min_sym_eig(M), _scale(M, rhs), pre, 1.0


# -- checks ---------------------------------------------------------------------

def _pairwise_check(name, margin_fn, F, ts, S, samples, seed, tol, grid, a, b):
    rng = np.random.default_rng(seed)
    pick = _NodeSampler(ts, grid, a, b, rng)
    worst = _Worst()
    done = misses = 0
    for _ in range(samples):
        t = pick()
        pair = sample_ordered_pair(S, rng, tol, boundary=rng.uniform() < S.boundary_fraction)
        if pair is None:
            misses += 1
            continue
        P, Q = pair
        mu = ts.mu(t)
        m, scale = margin_fn(F, t, P, Q, mu)
        done += 1
        worst.offer(classify(m, scale, tol), m, scale, lambda: {"t": t, "mu": mu, "P": P, "Q": Q, "margin": m})
    if worst.failed:
        return CheckRecord(name, Verdict.FAIL, worst.margin, done, worst.witness)
    if misses:
        return CheckRecord(name, Verdict.INDETERMINATE, worst.margin, done, worst.witness,
                           f"sampler found no P > Q inside S for {misses} draws")
    return CheckRecord(name, Verdict.PASS, worst.margin, done, worst.witness)


def check_lipschitz_left(F: MatrixField, B, ts: TimeScale, S: DomainSet, samples=500, seed=0,
                         tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None) -> CheckRecord:
    """F(t,P) - F(t,Q) <= B(t)(P - Q) on sampled P > Q in S and t in T^kappa."""
    return _pairwise_check("lipschitz_left", lambda *x: lipschitz_left_margin(x[0], B, *x[1:]),
                           F, ts, S, samples, seed, tol, grid, a, b)


def check_lipschitz_right(F: MatrixField, C, ts: TimeScale, S: DomainSet, samples=500, seed=0,
                          tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None) -> CheckRecord:
    """F(t,P) - F(t,Q) <= (P - Q) C(t)."""
    return _pairwise_check("lipschitz_right", lambda *x: lipschitz_right_margin(x[0], C, *x[1:]),
                           F, ts, S, samples, seed, tol, grid, a, b)


def check_lipschitz_sigma_left(F: MatrixField, B, ts: TimeScale, S: DomainSet, samples=500, seed=0,
                               tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None) -> CheckRecord:
    """F(t,P) - F(t,Q) <= -(-)B(t) (P - Q); identical to the left check where mu = 0."""
    return _pairwise_check("lipschitz_sigma_left",
                           lambda *x: lipschitz_sigma_left_margin(x[0], B, *x[1:], tol=tol),
                           F, ts, S, samples, seed, tol, grid, a, b)


def check_lipschitz_sigma_right(F: MatrixField, C, ts: TimeScale, S: DomainSet, samples=500, seed=0,
                                tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None) -> CheckRecord:
    return _pairwise_check("lipschitz_sigma_right",
                           lambda *x: lipschitz_sigma_right_margin(x[0], C, *x[1:], tol=tol),
                           F, ts, S, samples, seed, tol, grid, a, b)


def check_partial_bound(F: MatrixField, L, ts: TimeScale, S: DomainSet, samples=500, seed=0,
                        tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None) -> CheckRecord:
    """dF/dp_ij <= L for every (i, j) at sampled (t, P), boundary samples included."""
    L = as_matrix(L, F.n)
    rng = np.random.default_rng(seed)
    pick = _NodeSampler(ts, grid, a, b, rng)
    worst = _Worst()
    for k in range(samples):
        t = pick()
        P = S.sample(rng, boundary=rng.uniform() < S.boundary_fraction)
        mu = ts.mu(t)
        try:
            m, ij, scale = partial_bound_margin(F, L, t, P, mu)
        except (ArithmeticError, ValueError) as exc:
            return CheckRecord("partial_bound", Verdict.INDETERMINATE, None, k + 1,
                               {"t": t, "mu": mu, "P": P}, f"partial derivative evaluation failed: {exc}")
        worst.offer(classify(m, scale, tol), m, scale,
                    lambda: {"t": t, "mu": mu, "P": P, "index": list(ij), "margin": m})
    return CheckRecord("partial_bound", Verdict.FAIL if worst.failed else Verdict.PASS, worst.margin, samples,
                       worst.witness, "a pass licenses B = L (left) or C = L (right)")


def check_bound_positive_definite(B, ts: TimeScale, nodes=None, grid=GridSpec(), tol=DEFAULT_TOL,
                                  a=None, b=None, name="bound_positive_definite") -> CheckRecord:
    """Strict definiteness of the bound at grid nodes of T^kappa."""
    B = as_curve(B)
    times = kappa_nodes(ts, grid, a, b) if nodes is None else nodes
    worst, witness, worst_rel = math.inf, None, math.inf
    verdicts = []
    for t in times:
        t = float(t)
        Bt = _at(B, t, ts.mu(t))
        m = min_sym_eig(Bt)
        verdicts.append(classify(m, _scale(Bt), tol, strict=True))
        if m / _scale(Bt) < worst_rel:
            worst, worst_rel, witness = m, m / _scale(Bt), {"t": t, "B": Bt, "margin": m}
    verdict = (Verdict.FAIL if Verdict.FAIL in verdicts else
               Verdict.INDETERMINATE if Verdict.INDETERMINATE in verdicts else Verdict.PASS)
    return CheckRecord(name, verdict, worst, len(times), witness)


def check_bound_regressive(B, ts: TimeScale, grid=GridSpec(), tol=DEFAULT_TOL, a=None, b=None) -> CheckRecord:
    B = as_curve(B)
    times = [t for t in kappa_nodes(ts, grid, a, b) if ts.mu(t) > 0]
    for t in times:
        mu = ts.mu(t)
        M = np.eye(B.n) + mu * _at(B, t, mu)
        if not is_invertible(M, tol):
            return CheckRecord("bound_regressive", Verdict.FAIL, 0.0, len(times), {"t": float(t), "mu": mu},
                               "I + mu B is singular")
    return CheckRecord("bound_regressive", Verdict.PASS, None, len(times))


def commutator_size(X, Y) -> float:
    """max|XY - YX| relative to max(1, |X| |Y|)."""
    return max_abs(X @ Y - Y @ X) / max(1.0, max_abs(X) * max_abs(Y))


def check_commutation(B, ts: TimeScale, S: Optional[DomainSet], nodes=8, seed=0, tol=DEFAULT_TOL,
                      grid=GridSpec(), a=None, b=None, curves=(), samples_per_node=4, h=1e-5) -> CheckRecord:
    """e_B(t, a) commutes with B(t) and with sampled P in S.

    ``curves`` are extra matrix curves (for instance P, Q) whose values and
    delta derivatives must also commute with e_B(t, a).
    """
    B = as_curve(B)
    a = ts.min if a is None else a
    rng = np.random.default_rng(seed)
    pool = kappa_nodes(ts, grid, a, b)
    idx = np.unique(np.linspace(0, len(pool) - 1, min(nodes, len(pool))).astype(int))
    scattered = [i for i, t in enumerate(pool) if ts.mu(t) > 0]
    idx = sorted(set(idx.tolist()) | set(scattered[:nodes]))
    worst, witness, count = 0.0, None, 0
    for i in idx:
        t = float(pool[i])
        E = exp_ode(B, ts, t, a, grid, tol)
        others = [("B", _at(B, t, ts.mu(t)))]
        if S is not None:
            others += [("P", S.sample(rng)) for _ in range(samples_per_node)]
        for k, C in enumerate(curves):
            others.append((f"curve{k}", _at(C, t, ts.mu(t))))
            if ts.in_kappa(t):
                others.append((f"curve{k}_delta", delta_derivative(C, ts, t, h)))
        for what, X in others:
            c = commutator_size(E, X)
            count += 1
            if c > worst:
                worst, witness = c, {"t": t, "with": what, "E": E, "X": X, "commutator": c}
    verdict = Verdict.PASS if worst <= tol.eq_tol else Verdict.FAIL
    return CheckRecord("commutation", verdict, 0.0 - worst, count, witness if verdict is Verdict.FAIL else None,
                       "margin is minus the worst relative commutator")


def check_inverse_lipschitz(P_curve, Q_curve, B, side: str, sigma_form: bool, ts: TimeScale, nodes=50,
                            tol=DEFAULT_TOL, grid=GridSpec(), a=None, b=None, h=1e-5) -> CheckRecord:
    """(P - Q)^{-1} <= (P^Delta - Q^Delta)^{-1} B (left) or B (P^Delta - Q^Delta)^{-1} (right).

    ``sigma_form`` replaces B by -(-)B.  The preconditions P - Q > 0 and
    P^Delta - Q^Delta > 0 are checked at every node; a violation fails the
    record, a near-singular difference makes it indeterminate.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    P_curve, Q_curve = as_curve(P_curve), as_curve(Q_curve)
    pool = kappa_nodes(ts, grid, a, b)
    idx = np.unique(np.linspace(0, len(pool) - 1, min(nodes, len(pool))).astype(int))
    name = f"inverse_lipschitz_{side}" + ("_sigma" if sigma_form else "")
    worst = _Worst()
    unsure = None
    for i in idx:
        t = float(pool[i])
        m, scale, pre, _ = inverse_lipschitz_margin(P_curve, Q_curve, B, ts, t, side, sigma_form, h, tol)
        pre_v = classify(pre, 1.0, tol, strict=True)
        if pre_v is Verdict.FAIL:
            return CheckRecord(name, Verdict.FAIL, pre, len(idx), {"t": t, "precondition_margin": pre},
                               "precondition violated: P - Q and P^Delta - Q^Delta must be positive definite")
        if pre_v is Verdict.INDETERMINATE or m is None:
            unsure = unsure or {"t": t, "precondition_margin": pre}
            continue
        worst.offer(classify(m, scale, tol), m, scale, {"t": t, "margin": m})
    if worst.failed:
        return CheckRecord(name, Verdict.FAIL, worst.margin, len(idx), worst.witness)
    if unsure:
        return CheckRecord(name, Verdict.INDETERMINATE, worst.margin, len(idx), unsure,
                           "P - Q or P^Delta - Q^Delta is numerically singular")
    return CheckRecord(name, Verdict.PASS, worst.margin, len(idx), worst.witness)


# -- certify --------------------------------------------------------------------

@dataclass
class Problem:
    """Everything a certificate needs.

    ``bound`` is B (left results), C (right results) or L (partial-derivative
    routes).  The inverse corollaries use ``P_curve`` and ``Q_curve`` instead
    of a field.
    """

    ts: TimeScale
    bound: object
    field: Optional[MatrixField] = None
    domain: Optional[DomainSet] = None
    P_curve: Optional[MatrixCurve] = None
    Q_curve: Optional[MatrixCurve] = None
    a: Optional[float] = None
    b: Optional[float] = None
    samples: int = 500
    nodes: int = 50
    commutation_nodes: int = 8
    seed: int = 0
    tol: Tolerances = DEFAULT_TOL
    grid: GridSpec = GridSpec()


#: theorem tag -> (Lipschitz check, side, sigma form)
THEOREMS = {
    "exis1": ("lipschitz", "left", False),
    "exis_right": ("lipschitz", "right", False),
    "exis2": ("partial", "left", False),
    "exisright": ("partial", "right", False),
    "exis3": ("lipschitz", "left", True),
    "exis3right": ("lipschitz", "right", True),
    "exis4": ("inverse", "left", False),
    "exis4right": ("inverse", "right", False),
    "exis5": ("inverse", "left", True),
    "exis5right": ("inverse", "right", True),
}

_PAIRWISE = {
    ("left", False): check_lipschitz_left,
    ("right", False): check_lipschitz_right,
    ("left", True): check_lipschitz_sigma_left,
    ("right", True): check_lipschitz_sigma_right,
}


def certify(theorem: str, problem: Problem) -> CertificateReport:
    """Run every sampled check required by ``theorem`` and aggregate them."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem tag {theorem!r}; expected one of {sorted(THEOREMS)}")
    kind, side, sigma_form = THEOREMS[theorem]
    p = problem
    ts, tol, grid = p.ts, p.tol, p.grid
    a = ts.min if p.a is None else p.a
    b = ts.max if p.b is None else p.b
    bound = p.bound if kind != "partial" else as_matrix(p.bound)
    records = [CheckRecord("rd_continuity", Verdict.ASSUMED, note="not decidable from samples; assumed")]
    records.append(check_bound_positive_definite(bound, ts, grid=grid, tol=tol, a=a, b=b))
    if sigma_form:
        records.append(check_bound_regressive(bound, ts, grid, tol, a, b))
    if kind == "inverse":
        if p.P_curve is None or p.Q_curve is None:
            raise ValueError(f"{theorem} needs P_curve and Q_curve")
        records.append(check_commutation(bound, ts, None, p.commutation_nodes, p.seed, tol, grid, a, b,
                                         curves=(p.P_curve, p.Q_curve)))
        records.append(check_inverse_lipschitz(p.P_curve, p.Q_curve, bound, side, sigma_form, ts, p.nodes,
                                               tol, grid, a, b))
    else:
        if p.field is None or p.domain is None:
            raise ValueError(f"{theorem} needs a field and a domain set")
        records.append(check_commutation(bound, ts, p.domain, p.commutation_nodes, p.seed, tol, grid, a, b))
        if kind == "partial":
            records.append(check_partial_bound(p.field, bound, ts, p.domain, p.samples, p.seed, tol, grid, a, b))
        else:
            records.append(_PAIRWISE[side, sigma_form](p.field, bound, ts, p.domain, p.samples, p.seed,
                                                       tol, grid, a, b))
    params = {"samples": p.samples, "nodes": p.nodes, "seed": p.seed, "a": a, "b": b,
              "dense_step": grid.dense_step, "psd_tol": tol.psd_tol, "eq_tol": tol.eq_tol,
              "time_scale": ts.to_config()}
    if p.domain is not None:
        params["domain"] = {"kind": p.domain.kind, "structure": p.domain.structure,
                            "radius": p.domain.radius, "center": p.domain.center}
    return CertificateReport(theorem, records, params)
