"""Initial value problems X^Delta = F(t, X) and X^Delta = F(t, X^sigma).

Trajectories live on the grid nodes of ``[a, b]_T``.  Jumps at right-scattered
points are taken exactly (explicit update, or an implicit solve for the
sigma form); dense segments are integrated with fixed-step RK4, where the two
forms coincide because ``X^sigma = X`` when ``mu = 0``.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .curves import MatrixCurve, MatrixField, as_matrix
from .errors import ConvergenceError, DimensionError, RegressivityError, SolverError
from .matrixops import DEFAULT_TOL, circle_minus, max_abs
from .timescale import GridSpec, TimeGrid, TimeScale, cumulative_integral
from .tsexp import exp_ode_path, rk4_step

EXPLICIT = "explicit"
SIGMA = "sigma"
SINGULAR_TOL = 1e-8


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # (N, n, n)
    form: str
    grid: GridSpec
    stats: dict = field(default_factory=dict)

    @property
    def nodes(self):
        return list(zip(self.times.tolist(), self.values))

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def at(self, t, atol=1e-12) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > atol:
            raise KeyError(f"t = {t!r} is not a trajectory node")
        return self.values[k]

    def to_csv(self, fh=None) -> str | None:
        """Write ``t, x_11, ..., x_nn`` rows with 17 significant digits."""
        own = fh is None
        fh = io.StringIO() if own else fh
        n = self.n
        fh.write("# format_version: 1\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x_{i + 1}{j + 1}" for i in range(n) for j in range(n)])
        for t, X in zip(self.times, self.values):
            w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in X.ravel()])
        return fh.getvalue() if own else None


def read_trajectory_csv(text, form=EXPLICIT, grid=GridSpec()) -> Trajectory:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    n = int(round(np.sqrt(len(header) - 1)))
    data = np.array([[float(x) for x in r] for r in body])
    return Trajectory(data[:, 0], data[:, 1:].reshape(-1, n, n), form, grid)


def _evaluate(F, t, X, mu):
    try:
        Y = np.asarray(F(t, X, mu), dtype=float)
    except SolverError:
        raise
    except (ArithmeticError, ValueError) as exc:
        raise SolverError(f"field evaluation failed at t = {t!r}: {exc}", t=t) from exc
    if Y.shape != X.shape:
        raise DimensionError(f"field returned shape {Y.shape}, expected {X.shape}")
    if not np.all(np.isfinite(Y)):
        raise SolverError(f"field evaluation produced non-finite values at t = {t!r}", t=t)
    return Y


def _prepare(F, ts, a, b, A):
    if not a < b:
        raise ValueError(f"need a < b, got a = {a!r}, b = {b!r}")
    A = as_matrix(A, F.n)
    g = ts.restrict(a, b).grid
    return A, g


def _rk4(F, t0, X, h):
    return rk4_step(lambda s, y: _evaluate(F, s, y, 0.0), t0, X, h)


def solve_explicit(F: MatrixField, ts: TimeScale, a, b, A, grid: GridSpec = GridSpec()) -> Trajectory:
    """Solve X^Delta = F(t, X), X(a) = A on [a, b]_T."""
    A, mk = _prepare(F, ts, a, b, A)
    g = mk(grid)
    X = np.empty((len(g), F.n, F.n))
    X[0] = A
    jumps = rk = 0
    for k, t0, t1, m in g.steps():
        if m > 0:
            X[k + 1] = X[k] + m * _evaluate(F, t0, X[k], m)
            jumps += 1
        else:
            X[k + 1] = _rk4(F, t0, X[k], t1 - t0)
            rk += 1
    return Trajectory(g.times.copy(), X, EXPLICIT, grid, {"jumps": jumps, "rk4_steps": rk})


def _lipschitz_estimate(F, t, X, mu, rng):
    eps = 1e-7 * max(1.0, max_abs(X))
    F0 = _evaluate(F, t, X, mu)
    est = 0.0
    for _ in range(2):
        D = rng.standard_normal(X.shape)
        D /= max_abs(D)
        est = max(est, max_abs(_evaluate(F, t, X + eps * D, mu) - F0) / eps)
    return est


def implicit_step(F, t, X, mu, tol=1e-10, max_iter=50, damping=1.0, guess=None, rng=None):
    """Solve Z = X + mu*F(t, Z) for Z = X(sigma(t)).

    Damped fixed-point iteration when ``mu * Lip`` is small, otherwise (or
    on stagnation) Newton on the vectorised system with the analytic or
    finite-difference Jacobian.  Returns ``(Z, info)``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = X.shape[0]
    Z = X + mu * _evaluate(F, t, X, mu) if guess is None else np.array(guess, dtype=float)
    resid = lambda Z: Z - X - mu * _evaluate(F, t, Z, mu)
    info = {"fixed_point_iterations": 0, "newton_iterations": 0}
    if mu * _lipschitz_estimate(F, t, X, mu, rng) < 0.5:
        for _ in range(max_iter):
            R = resid(Z)
            r = max_abs(R)
            if r <= tol:
                info["residual"] = r
                return Z, info
            Z = Z - damping * R
            info["fixed_point_iterations"] += 1
    N = n * n
    for _ in range(max_iter + 1):
        R = resid(Z)
        r = max_abs(R)
        if r <= tol:
            info["residual"] = r
            return Z, info
        if info["newton_iterations"] == max_iter:
            break
        MJ = mu * F.jacobian(t, Z, mu).reshape(N, N).T
        J = np.eye(N) - MJ
        try:
            sv = np.linalg.svd(J, compute_uv=False)
            # relative to |I| + |mu*J_F|; finite-difference Jacobians carry ~1e-10 noise
            if not np.all(np.isfinite(sv)) or sv[-1] <= SINGULAR_TOL * max(1.0, np.linalg.norm(MJ, 2)):
                raise np.linalg.LinAlgError("ill-conditioned")
            step = np.linalg.solve(J, R.ravel())
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Newton system in implicit step at t = {t!r}", t=t, residual=r) from exc
        Z = Z - damping * step.reshape(n, n)
        info["newton_iterations"] += 1
    raise ConvergenceError(
        f"implicit step did not converge at t = {t!r} within {max_iter} iterations (residual {r:.3e})",
        t=t, residual=r)


def solve_sigma(F: MatrixField, ts: TimeScale, a, b, A, grid: GridSpec = GridSpec(),
                newton_tol=1e-10, max_iter=50, *, damping=1.0, guess_noise=0.0, seed=0) -> Trajectory:
    """Solve X^Delta = F(t, X^sigma), X(a) = A on [a, b]_T.

    ``damping`` and ``guess_noise`` exist for the multiplicity probe: they
    jitter the iteration and perturb the implicit-step starting guesses.
    """
    A, mk = _prepare(F, ts, a, b, A)
    g = mk(grid)
    rng = np.random.default_rng(seed)
    X = np.empty((len(g), F.n, F.n))
    X[0] = A
    stats = {"jumps": 0, "rk4_steps": 0, "newton_iterations": 0, "fixed_point_iterations": 0,
             "max_implicit_residual": 0.0}
    for k, t0, t1, m in g.steps():
        if m > 0:
            guess = None
            if guess_noise:
                pred = X[k] + m * _evaluate(F, t0, X[k], m)
                guess = pred + guess_noise * max(1.0, max_abs(pred)) * rng.standard_normal(pred.shape)
            Z, info = implicit_step(F, t0, X[k], m, newton_tol, max_iter, damping, guess, rng)
            X[k + 1] = Z
            stats["jumps"] += 1
            stats["newton_iterations"] += info["newton_iterations"]
            stats["fixed_point_iterations"] += info["fixed_point_iterations"]
            stats["max_implicit_residual"] = max(stats["max_implicit_residual"], info["residual"])
        else:
            X[k + 1] = _rk4(F, t0, X[k], t1 - t0)
            stats["rk4_steps"] += 1
    return Trajectory(g.times.copy(), X, SIGMA, grid, stats)


def solve_linear_sigma(V: MatrixCurve, G: MatrixCurve, ts: TimeScale, a, b, A,
                       grid: GridSpec = GridSpec(), tol=DEFAULT_TOL) -> Trajectory:
    """Closed-form solution of X^Delta = -V^T(t) X^sigma + G(t), X(a) = A.

    ``X(t) = E(t) [A + integral_a^t E(s)^{-1} G(s) Delta s]`` with
    ``E(t) = e_{(-)V^T}(t, a)`` computed by :func:`exp_ode_path`; the
    semigroup factorisation ``e(t, s) = E(t) E(s)^{-1}`` avoids one ODE
    solve per output node.
    """
    n = V.n
    A = as_matrix(A, n)
    if not a < b:
        raise ValueError(f"need a < b, got a = {a!r}, b = {b!r}")

    def Vt(t, mu):
        return np.asarray(V(t, mu) if V.mu_aware else V(t), dtype=float).T

    def Gt(t, mu):
        return np.asarray(G(t, mu) if G.mu_aware else G(t), dtype=float)

    W = MatrixCurve(lambda t, mu: circle_minus(Vt(t, mu), mu, tol, t), n, mu_aware=True, ts=ts)
    try:
        g, E = exp_ode_path(W, ts, a, b, grid, tol)
    except RegressivityError as exc:
        raise RegressivityError(f"V is not regressive at t = {exc.t!r}: I + mu*V^T is singular", t=exc.t) from exc
    Einv = np.linalg.inv(E)
    dense = np.array([Ei @ Gt(t, 0.0) for Ei, t in zip(Einv, g.times)])
    jump = np.array([Ei @ Gt(t, m) if m > 0 else d for Ei, t, m, d in zip(Einv, g.times, g.mu, dense)])
    C = cumulative_integral(g, dense, jump, start=A)
    X = np.einsum("kij,kjl->kil", E, C)
    return Trajectory(g.times.copy(), X, SIGMA, grid, {"method": "linear_closed_form"})


def residual_check(traj: Trajectory, F: MatrixField, ts: TimeScale, grid: GridSpec | None = None) -> float:
    """max_t || X(t) - A - integral_a^t F(s, X(s)) Delta s ||_max over trajectory nodes.

    For the sigma form the jump integrand uses X(sigma(s)).  The integral is
    folded left from ``A`` so that an explicit solve on a purely discrete
    time scale reproduces it bit for bit.
    """
    grid = grid or traj.grid
    g = ts.restrict(float(traj.times[0]), float(traj.times[-1])).grid(grid)
    if len(g) != len(traj.times) or not np.allclose(g.times, traj.times, rtol=0, atol=1e-12):
        raise DimensionError("trajectory nodes do not match the grid of its time scale")
    X = traj.values
    if X.shape[1] != F.n:
        raise DimensionError(f"trajectory is {X.shape[1]}x{X.shape[1]} but the field is {F.n}x{F.n}")
    dense = np.array([_evaluate(F, t, Xk, 0.0) for t, Xk in zip(g.times, X)])
    jump = dense.copy()
    for k, t0, _, m in g.steps():
        if m > 0:
            state = X[k + 1] if traj.form == SIGMA else X[k]
            jump[k] = _evaluate(F, t0, state, m)
    Y = cumulative_integral(g, dense, jump, start=X[0])
    return float(np.max(np.abs(X - Y)))


@dataclass
class ProbeReport:
    trials: int
    max_distance: float
    threshold: float
    multiplicity_suspected: bool
    witness: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)
    nudged: bool = False

    def to_dict(self):
        return {"format_version": 1, "trials": self.trials, "max_distance": self.max_distance,
                "threshold": self.threshold, "multiplicity_suspected": self.multiplicity_suspected,
                "initial_nudges": self.nudged, "witness": self.witness, "runs": self.runs}


def non_lipschitz_at(F: MatrixField, t, A, mu=0.0, ratio=10.0) -> bool:
    """Heuristic: difference quotients along a positive nudge blow up as the step shrinks.

    For a locally Lipschitz field the quotients at steps 1e-2 and 1e-10 agree
    to within rounding; for fields like 3 x^{2/3} at x = 0 they grow without
    bound.
    """
    N = np.ones_like(A)
    F0 = _evaluate(F, t, A, mu)

    def quotient(eps):
        return max_abs(_evaluate(F, t, A + eps * N, mu) - F0) / eps

    coarse, fine = quotient(1e-2), quotient(1e-10)
    return fine > ratio * max(coarse, 1.0)


def multiplicity_probe(F: MatrixField, form: str, ts: TimeScale, a, b, A, grid: GridSpec = GridSpec(),
                       trials: int = 20, seed: int = 0, newton_tol=1e-10, max_iter=50,
                       residual_tol=1e-8, nudges="auto") -> ProbeReport:
    """Re-solve under perturbations and report the spread of the solutions.

    Each trial draws a dense step (halved, unchanged or doubled), a Newton /
    fixed-point damping in [0.7, 1] and perturbed implicit-step guesses.
    Odd trials also get a positive initial nudge of size ~``newton_tol``
    (even trials a zero nudge) when ``nudges`` is true, or, for ``"auto"``,
    when the field is not Lipschitz at ``(a, A)``; a Lipschitz field cannot
    split under such nudges, so it only contributes noise.  Trajectories are
    compared on the nodes they share; multiplicity is suspected when the
    max pairwise distance exceeds ``100 * residual_tol``.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if form not in (EXPLICIT, SIGMA):
        raise ValueError(f"unknown form {form!r}")
    rng = np.random.default_rng(seed)
    A = as_matrix(A, F.n)
    if nudges == "auto":
        nudges = non_lipschitz_at(F, a, A, ts.mu(a))
    plans = []
    for i in range(trials):
        plans.append({
            "dense_step": grid.dense_step * [1.0, 0.5, 2.0][i % 3],
            "damping": 1.0 if i == 0 else float(rng.uniform(0.7, 1.0)),
            "guess_noise": 0.0 if i == 0 else float(rng.uniform(0.0, 1e-3)),
            "nudge": float(newton_tol * rng.uniform(0.5, 1.0)) if nudges and i % 2 else 0.0,
            "seed": int(rng.integers(2**31)),
        })
    trajs = []
    for p in plans:
        A0 = A + p["nudge"]
        gs = GridSpec(p["dense_step"])
        if form == EXPLICIT:
            tr = solve_explicit(F, ts, a, b, A0, gs)
        else:
            tr = solve_sigma(F, ts, a, b, A0, gs, newton_tol, max_iter, damping=p["damping"],
                             guess_noise=p["guess_noise"], seed=p["seed"])
        trajs.append(tr)
    keyed = [{round(float(t), 10): X for t, X in zip(tr.times, tr.values)} for tr in trajs]
    common = sorted(set.intersection(*(set(k) for k in keyed)))
    best, witness = 0.0, {}
    for i, j in itertools.combinations(range(trials), 2):
        for t in common:
            d = max_abs(keyed[i][t] - keyed[j][t])
            if d > best:
                best, witness = d, {"trials": [i, j], "t": t}
    threshold = 100 * residual_tol
    return ProbeReport(trials, best, threshold, best > threshold, witness, plans, bool(nudges))
