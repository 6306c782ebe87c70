"""Built-in problems: the three worked examples and a few reference fields."""
from __future__ import annotations

import math

import numpy as np

from .curves import MatrixCurve, MatrixField, as_matrix
from .timescale import TimeScale

#: the mixed time scale used by the exponential and Example-3 fixtures
MIXED_TS = TimeScale([0.0, 0.25, 0.5, 0.75, (1.0, 2.0)])


# -- Example 1 -----------------------------------------------------------------

def _example1(t, P):
    x1, x2 = P[0, 0], P[0, 1]
    return np.array([[1.0 + x1 * x1, t * t - x2], [x2 + t, t - x1]])


def _example1_partials(t, P):
    D = np.zeros((2, 2, 2, 2))
    D[0, 0] = [[2.0 * P[0, 0], 0.0], [0.0, -1.0]]
    D[0, 1] = [[0.0, -1.0], [1.0, 0.0]]
    return D


def example1_field() -> MatrixField:
    """F(t, P) = [[1 + x1^2, t^2 - x2], [x2 + t, t - x1]] with x1 = p_11, x2 = p_12."""
    return MatrixField(_example1, 2, partials=_example1_partials)


def example1_bound(k=2.0) -> np.ndarray:
    return k * np.eye(2)


def frobenius_projection(P, radius=math.sqrt(2.0)):
    """Radial projection onto the ball tr(P^T P) <= radius^2."""
    r = float(np.linalg.norm(P))
    return P if r <= radius else P * (radius / r)


def example1_clamped_field(radius=math.sqrt(2.0)) -> MatrixField:
    """Example 1 composed with the projection onto its domain ball.

    Explicit steps of length 1 leave the ball immediately and then blow up;
    the projected field keeps long discrete runs finite without changing
    the field inside the ball.
    """
    return MatrixField(lambda t, P: _example1(t, frobenius_projection(P, radius)), 2)


# -- Example 2 -----------------------------------------------------------------

def example2_curves(u=lambda t: 1.0 + t, w=lambda t: 0.5 * t):
    """The P and Q curves; P - Q = u(t) I."""

    def P(t):
        off = w(t) - t
        d = 2.0 * u(t) + t * t
        return np.array([[d, off], [off, d]])

    def Q(t):
        off = w(t) - t
        d = u(t) + t * t
        return np.array([[d, off], [off, d]])

    return MatrixCurve(P, 2), MatrixCurve(Q, 2)


def example2_bound(ts: TimeScale, u=lambda t: 1.0 + t, h=1e-5) -> MatrixCurve:
    """B(t) = u^Delta(t) I, the derivative taken on the time scale."""
    from .timescale import delta_derivative

    U = MatrixCurve(lambda t: np.array([[u(t)]]), 1)
    return MatrixCurve(lambda t: float(delta_derivative(U, ts, t, h)[0, 0]) * np.eye(2), 2)


# -- Example 3 -----------------------------------------------------------------

def example3_V(K, ts: TimeScale) -> MatrixCurve:
    """V(t) = K (I + 2 mu K)^{-1}, graininess aware."""
    K = as_matrix(K)
    n = K.shape[0]
    return MatrixCurve(lambda t, mu: K @ np.linalg.inv(np.eye(n) + 2 * mu * K), n, mu_aware=True, ts=ts)


def example3_G(K, ts: TimeScale, a=0.0) -> MatrixCurve:
    """G(t) = e_{(-)V}(t, a) in closed form for diagonal K.

    Each diagonal entry k contributes the jump factor (1 + 2 mu k) / (1 + 3 mu k)
    at every right-scattered point and exp(-k * length) on dense parts.
    """
    K = as_matrix(K)
    k = np.diag(K).copy()
    if not np.allclose(K, np.diag(k)):
        raise ValueError("the closed-form Example 3 forcing term needs a diagonal K")

    def G(t):
        t = ts.canonical(t)
        if t < a:
            raise ValueError("Example 3 forcing term is defined for t >= a")
        d = np.exp(-k * ts.dense_measure(a, t))
        for s in ts.scattered_points(a, t):
            m = ts.mu(s)
            d = d * (1 + 2 * m * k) / (1 + 3 * m * k)
        return np.diag(d)

    return MatrixCurve(G, K.shape[0], ts=ts)


def example3_field(K, ts: TimeScale, a=0.0) -> MatrixField:
    """F(t, P) = -V(t) P + G(t), graininess aware."""
    V = example3_V(K, ts)
    G = example3_G(K, ts, a)
    n = V.n

    def partials(t, P, mu):
        Vt = V(t, mu)
        D = np.zeros((n, n, n, n))
        for i in range(n):
            for j in range(n):
                D[i, j][:, j] = -Vt[:, i]
        return D

    return MatrixField(lambda t, P, mu: -V(t, mu) @ P + G(t), n, partials=partials, mu_aware=True, ts=ts)


def example3_solution(K, ts: TimeScale, a=0.0) -> MatrixCurve:
    G = example3_G(K, ts, a)
    return MatrixCurve(lambda t: G(t) * (1.0 + t - a), G.n)


def example3_bound(K, ts: TimeScale) -> MatrixCurve:
    K = as_matrix(K)
    return MatrixCurve(lambda t: 2 * K, K.shape[0], ts=ts)


# -- reference fields ----------------------------------------------------------

def scalar_nonunique() -> MatrixField:
    """x' = 3 x^{2/3}: both x = 0 and x = t^3 leave x(0) = 0."""
    return MatrixField(lambda t, P: 3.0 * np.cbrt(P) ** 2, 1)


def linear_field(V, G) -> MatrixField:
    """F(t, P) = -V(t)^T P + G(t) for the sigma form; V, G are curves or constants."""
    V = V if isinstance(V, MatrixCurve) else MatrixCurve.const(V)
    G = G if isinstance(G, MatrixCurve) else MatrixCurve.const(G)
    n = V.n

    def ev(C, t, mu):
        return np.asarray(C(t, mu) if C.mu_aware else C(t), dtype=float)

    return MatrixField(lambda t, P, mu: -ev(V, t, mu).T @ P + ev(G, t, mu), n, mu_aware=True, ts=V.ts or G.ts)
