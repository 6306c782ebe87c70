"""Generalised matrix exponential e_K(t, a) on a time scale.

Two routes are provided:

* :func:`exp_ode` integrates the defining equation ``Y^Delta = K(t) Y``,
  ``Y(a) = I``: exact factors ``I + mu K`` at right-scattered points and
  classical RK4 on dense segments.  It is valid for any regressive ``K``.
* :func:`exp_commuting` evaluates the closed form (exponential of the delta
  integral of the cylinder transform), which only holds when the family
  ``{K(s)}`` commutes.  The logarithm is never formed numerically since
  ``exp(Log(I + mu K)) = I + mu K``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.linalg

from .curves import MatrixCurve
from .errors import CommutationError, DomainError
from .matrixops import DEFAULT_TOL, circle_plus, max_abs, regressive_factor
from .timescale import GridSpec, TimeScale, cumulative_integral, delta_derivative


def _at(K, t, mu):
    if getattr(K, "mu_aware", False):
        return np.asarray(K(t, mu), dtype=float)
    return np.asarray(K(t), dtype=float)


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + h / 2, y + (h / 2) * k1)
    k3 = f(t + h / 2, y + (h / 2) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _dimension(K, ts, a):
    n = getattr(K, "n", None)
    return n if n is not None else _at(K, a, ts.mu(a)).shape[0]


def exp_ode_path(K, ts: TimeScale, a, b, grid: GridSpec = GridSpec(), tol=DEFAULT_TOL):
    """e_K(t, a) at every grid node of [a, b]_T (a <= b).

    Returns ``(time_grid, values)`` with ``values[k] = e_K(times[k], a)``.
    """
    g = ts.restrict(a, b).grid(grid)
    n = _dimension(K, ts, a)
    Y = np.empty((len(g), n, n))
    Y[0] = np.eye(n)
    rhs = lambda s, y: _at(K, s, 0.0) @ y
    for k, t0, t1, m in g.steps():
        if m > 0:
            Y[k + 1] = regressive_factor(_at(K, t0, m), m, tol, t0) @ Y[k]
        else:
            Y[k + 1] = rk4_step(rhs, t0, Y[k], t1 - t0)
    return g, Y


def _exp_backward(K, ts, t, a, grid, tol):
    """e_K(t, a) for t < a, integrating Z(tau) = e_K(tau, a) backwards from Z(a) = I."""
    g = ts.restrict(t, a).grid(grid)
    n = _dimension(K, ts, a)
    Z = np.eye(n)
    rhs = lambda s, y: _at(K, s, 0.0) @ y
    steps = list(g.steps())
    for k, t0, t1, m in reversed(steps):
        if m > 0:
            Z = np.linalg.solve(regressive_factor(_at(K, t0, m), m, tol, t0), Z)
        else:
            Z = rk4_step(rhs, t1, Z, t0 - t1)
    return Z


def exp_ode(K, ts: TimeScale, t, a, grid: GridSpec = GridSpec(), tol=DEFAULT_TOL) -> np.ndarray:
    """Transition matrix of Y^Delta = K(t) Y, Y(a) = I, evaluated at t.

    Works for non-commuting families (time-ordered product).  Raises
    :class:`RegressivityError` naming the offending point if some
    ``I + mu(s) K(s)`` is singular.
    """
    if t not in ts or a not in ts:
        raise DomainError(f"exp_ode arguments t = {t!r}, a = {a!r} must lie in the time scale")
    if t >= a:
        return exp_ode_path(K, ts, a, t, grid, tol)[1][-1]
    return _exp_backward(K, ts, t, a, grid, tol)


def _check_commuting(values, tol):
    for X, Y in product(values, repeat=2):
        c = max_abs(X @ Y - Y @ X)
        if c > tol.eq_tol * max(1.0, max_abs(X) * max_abs(Y)):
            raise CommutationError(
                "K(s) and K(s') do not commute; the closed-form exponential is invalid, use exp_ode")


def exp_commuting(K, ts: TimeScale, t, a, grid: GridSpec = GridSpec(), tol=DEFAULT_TOL) -> np.ndarray:
    """Closed-form exponential for commuting generator families.

    ``exp(integral of K over the dense part) * prod (I + mu(s) K(s))`` over
    right-scattered s in [a, t).  The commutation hypothesis is checked on
    the jump nodes and a sample of dense nodes.
    """
    if t not in ts or a not in ts:
        raise DomainError(f"exp_commuting arguments t = {t!r}, a = {a!r} must lie in the time scale")
    if t < a:
        return np.linalg.inv(exp_commuting(K, ts, a, t, grid, tol))
    g = ts.restrict(a, t).grid(grid)
    dense_vals = [_at(K, s, 0.0) for s in g.times]
    n = dense_vals[0].shape[0]
    jumps = [(s, m) for s, m in zip(g.times, g.mu) if m > 0]
    factors = [regressive_factor(_at(K, s, m), m, tol, s) for s, m in jumps]
    sample_idx = np.unique(np.linspace(0, len(g) - 1, min(len(g), 12)).astype(int))
    _check_commuting([dense_vals[i] for i in sample_idx] + factors, tol)
    # zero the integrand on jump steps so only the dense part is integrated
    integral = cumulative_integral(g, dense_vals, np.zeros_like(dense_vals))[-1]
    E = scipy.linalg.expm(integral)
    for F in factors:
        E = F @ E
    return E


@dataclass
class ExpIdentityReport:
    residuals: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)  # identity -> (t, s, r) witness

    def record(self, name, value, where):
        if value >= self.residuals.get(name, -1.0):
            self.residuals[name] = float(value)
            self.worst[name] = where


def _rel(X, Y):
    return max_abs(X - Y) / max(1.0, max_abs(Y))


def exp_identity_suite(K, L, ts: TimeScale, nodes, grid: GridSpec = GridSpec(), h=1e-5,
                       tol=DEFAULT_TOL) -> ExpIdentityReport:
    """Worst relative residuals of the exponential identities over node triples.

    Keys: ``zero`` and ``identity`` (e_0 = I = e_K(t,t)), ``sigma``
    (jump identity at right-scattered nodes), ``sigma_dense`` (trivial at
    dense nodes), ``inverse``, ``semigroup``, ``product`` (only when K and L
    commute on the sampled nodes; otherwise absent) and ``derivative``.
    """
    nodes = [ts.canonical(float(t)) for t in nodes]
    n = _dimension(K, ts, nodes[0])
    rep = ExpIdentityReport()
    cache = {}

    def E(gen, t, s, key):
        if (key, t, s) not in cache:
            cache[key, t, s] = exp_ode(gen, ts, t, s, grid, tol)
        return cache[key, t, s]

    zero = MatrixCurve.const(np.zeros((n, n)))
    I = np.eye(n)
    for t, s in product(nodes, repeat=2):
        rep.record("zero", _rel(E(zero, t, s, "0"), I), (t, s))
    for t in nodes:
        rep.record("identity", _rel(E(K, t, t, "K"), I), (t,))

    for t, s in product(nodes, repeat=2):
        if not ts.in_kappa(t):
            continue
        m = ts.mu(t)
        lhs = E(K, ts.sigma(t), s, "K")
        rhs = regressive_factor(_at(K, t, m), m, tol, t) @ E(K, t, s, "K")
        rep.record("sigma" if m > 0 else "sigma_dense", _rel(lhs, rhs), (t, s))

    for t, s in product(nodes, repeat=2):
        rep.record("inverse", _rel(E(K, s, t, "K"), np.linalg.inv(E(K, t, s, "K"))), (t, s))
    for t, s, r in product(nodes, repeat=3):
        rep.record("semigroup", _rel(E(K, t, s, "K") @ E(K, s, r, "K"), E(K, t, r, "K")), (t, s, r))

    if L is not None:
        sample = []
        for t in nodes:
            m = ts.mu(t)
            sample += [_at(K, t, m), _at(L, t, m)]
        try:
            _check_commuting(sample, tol)
            commuting = True
        except CommutationError:
            commuting = False
        if commuting:
            KL = MatrixCurve(lambda t, mu: circle_plus(_at(K, t, mu), _at(L, t, mu), mu), n,
                             mu_aware=True, ts=ts)
            for t, s in product(nodes, repeat=2):
                rep.record("product", _rel(E(K, t, s, "K") @ E(L, t, s, "L"), E(KL, t, s, "KL")), (t, s))

    for t, s in product(nodes, repeat=2):
        if not ts.in_kappa(t):
            continue
        curve = lambda tau, s=s: exp_ode(K, ts, tau, s, grid, tol)
        d = delta_derivative(curve, ts, t, h)
        m = ts.mu(t)
        rep.record("derivative", _rel(d, _at(K, t, m) @ E(K, t, s, "K")), (t, s))
    return rep
