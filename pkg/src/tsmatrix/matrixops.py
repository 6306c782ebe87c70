"""Dense real matrix utilities: definiteness, Loewner order, regressive algebra."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, RegressivityError


@dataclass(frozen=True)
class Tolerances:
    """``psd_tol`` is relative to the max-abs entry of the matrices compared;
    ``eq_tol`` is a relative max-abs matrix-equality tolerance."""

    psd_tol: float = 1e-10
    eq_tol: float = 1e-9

    def __post_init__(self):
        if self.psd_tol < 0 or self.eq_tol < 0:
            raise ValueError("tolerances must be non-negative")


DEFAULT_TOL = Tolerances()


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"
    ASSUMED = "assumed"


def max_abs(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def min_sym_eig(M) -> float:
    """Smallest eigenvalue of the symmetric part; equals min z^T M z over unit z."""
    return float(np.linalg.eigvalsh(sym(M))[0])


def _same_shape(A, B):
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")


def classify(margin, scale, tol=DEFAULT_TOL, strict=False) -> Verdict:
    """Turn a Loewner margin into a verdict.

    Non-strict inequalities pass when ``margin >= -psd_tol*scale``.  Strict
    ones pass only above ``+psd_tol*scale``; the band in between is
    indeterminate rather than a silent pass.
    """
    thr = tol.psd_tol * scale
    if strict:
        if margin > thr:
            return Verdict.PASS
        if margin < -thr:
            return Verdict.FAIL
        return Verdict.INDETERMINATE
    return Verdict.PASS if margin >= -thr else Verdict.FAIL


def is_positive_definite(M, tol=DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    return min_sym_eig(M) > tol.psd_tol * max_abs(M)


def is_positive_semidefinite(M, tol=DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    return min_sym_eig(M) >= -tol.psd_tol * max_abs(M)


def loewner_margin(A, B) -> float:
    """lambda_min(sym(B - A)); non-negative iff A <= B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _same_shape(A, B)
    return min_sym_eig(B - A)


def loewner_leq(A, B, tol=DEFAULT_TOL) -> bool:
    """A <= B in the Loewner order (B - A positive semidefinite, within tolerance)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    scale = max(max_abs(A), max_abs(B))
    return loewner_margin(A, B) >= -tol.psd_tol * scale


def loewner_less(A, B, tol=DEFAULT_TOL) -> Verdict:
    """Strict A < B; ties within tolerance come back INDETERMINATE."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    scale = max(max_abs(A), max_abs(B))
    return classify(loewner_margin(A, B), scale, tol, strict=True)


def hadamard_scale(M) -> float:
    """Product of row norms, an upper bound for |det M|."""
    return float(np.prod(np.linalg.norm(M, axis=1)))


def is_invertible(M, tol=DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    scale = hadamard_scale(M)
    return scale > 0 and abs(np.linalg.det(M)) > tol.psd_tol * scale


def regressive_factor(K, mu, tol=DEFAULT_TOL, t=None) -> np.ndarray:
    """I + mu*K, raising RegressivityError when it is (numerically) singular."""
    K = np.asarray(K, dtype=float)
    M = np.eye(K.shape[0]) + mu * K
    if mu != 0 and not is_invertible(M, tol):
        where = "" if t is None else f" at t = {t!r}"
        raise RegressivityError(f"I + mu*K is singular{where} (mu = {mu!r}); K is not regressive", t=t)
    return M


def is_regressive(K, ts, grid=None, tol=DEFAULT_TOL) -> bool:
    """Sampled check that I + mu(t)K(t) is invertible at every grid node of T^kappa."""
    from .timescale import GridSpec

    g = ts.kappa().grid(grid or GridSpec())
    for t, m in zip(g.times, g.mu):
        m_true = ts.mu(t)
        if m_true == 0:
            continue
        Kt = K(t, m_true) if getattr(K, "mu_aware", False) else K(t)
        if not is_invertible(np.eye(np.shape(Kt)[0]) + m_true * np.asarray(Kt), tol):
            return False
    return True


def circle_plus(A, B, mu) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _same_shape(A, B)
    return A + B + mu * (A @ B)


def circle_minus(A, mu, tol=DEFAULT_TOL, t=None) -> np.ndarray:
    """-(I + mu*A)^{-1} A, cross-checked against the right-factored form."""
    A = np.asarray(A, dtype=float)
    if mu == 0:
        return -A
    M = regressive_factor(A, mu, tol, t)
    left = -np.linalg.solve(M, A)
    right = -np.linalg.solve(M.T, A.T).T
    if max_abs(left - right) > tol.eq_tol * max(1.0, max_abs(left)):
        raise RegressivityError("left and right forms of the circle-minus disagree; I + mu*A is ill-conditioned", t=t)
    return left


def circle_minus_binary(A, B, mu, tol=DEFAULT_TOL) -> np.ndarray:
    """A (-) B = A - (I + mu*A)(I + mu*B)^{-1} B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _same_shape(A, B)
    n = A.shape[0]
    MB = regressive_factor(B, mu, tol)
    return A - (np.eye(n) + mu * A) @ np.linalg.solve(MB, B)


def random_pd(rng, n, shift=0.1) -> np.ndarray:
    """M^T M + shift*I with M uniform on [-1, 1]."""
    M = rng.uniform(-1.0, 1.0, size=(n, n))
    return M.T @ M + shift * np.eye(n)


@dataclass
class PropertySuiteReport:
    samples: int
    n: int
    passed: dict = field(default_factory=dict)
    worst_margin: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(v == self.samples for v in self.passed.values())

    @property
    def worst_psd_margin(self) -> float:
        return min(self.worst_margin.values())


def _rel_eig(M) -> float:
    return min_sym_eig(M) / max(max_abs(M), np.finfo(float).tiny)


def positive_definite_property_suite(samples: int, n: int, seed: int, tol=DEFAULT_TOL) -> PropertySuiteReport:
    """Sample PD pairs and check the eight standard positive-definite properties.

    Margins are relative (eigenvalue / max-abs entry) so that the report is
    scale free; definite properties require a margin above ``psd_tol``,
    semidefinite ones a margin above ``-psd_tol``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    names = ["inverse", "scaling", "eigenvalues", "det_trace", "sums_products",
             "commuting_product", "inverse_order", "beta_bound"]
    report = PropertySuiteReport(samples, n, {k: 0 for k in names}, {k: np.inf for k in names})
    I = np.eye(n)

    def note(name, margin, strict=True):
        ok = margin > tol.psd_tol if strict else margin >= -tol.psd_tol
        report.passed[name] += int(ok)
        report.worst_margin[name] = min(report.worst_margin[name], margin)

    for _ in range(samples):
        A = random_pd(rng, n)
        B = random_pd(rng, n)
        Ainv = np.linalg.inv(A)
        note("inverse", _rel_eig(Ainv))
        alpha = rng.uniform(1e-3, 1e3)
        note("scaling", _rel_eig(alpha * A))
        lam = np.linalg.eigvals(A)
        note("eigenvalues", float(np.min(lam.real)) / max_abs(A))
        note("det_trace", min(np.linalg.det(A) / max_abs(A) ** n, np.trace(A) / max_abs(A)))
        note("sums_products", min(_rel_eig(A + B), _rel_eig(A @ B @ A), _rel_eig(B @ A @ B)))
        # commuting partners share A's eigenvectors
        w, U = np.linalg.eigh(A)
        Bc = U @ np.diag(rng.uniform(0.1, 2.0, n)) @ U.T
        Cn = -(U @ np.diag(rng.uniform(0.0, 2.0, n)) @ U.T)
        pos = _rel_eig(A @ Bc)
        AC = A @ Cn
        nonpos = min_sym_eig(-AC) / max(max_abs(AC), np.finfo(float).tiny)
        ok = pos > tol.psd_tol and nonpos >= -tol.psd_tol
        report.passed["commuting_product"] += int(ok)
        report.worst_margin["commuting_product"] = min(report.worst_margin["commuting_product"], pos, nonpos)
        # B' <= A by construction, so B'^{-1} - A^{-1} must be PSD
        S = random_pd(rng, n, shift=0.0)
        Bs = A - 0.5 * w[0] / np.linalg.eigvalsh(S)[-1] * S
        D = np.linalg.inv(Bs) - Ainv
        note("inverse_order", min(_rel_eig(A - Bs), _rel_eig(D)), strict=False)
        beta = w[0] / 2
        note("beta_bound", _rel_eig(A - beta * I))
    return report
