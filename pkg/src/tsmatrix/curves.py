"""Matrix-valued curves t -> X(t) and fields (t, P) -> F(t, P).

Evaluators may depend on the graininess at the evaluation point.  That
matters at right-scattered points that close a dense segment: the
integrators want the left limit there (``mu = 0``) while jump updates want
the actual graininess.  Callers therefore pass ``mu`` explicitly; when it is
omitted, a graininess-aware object falls back to its attached time scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError


def as_matrix(value, n=None) -> np.ndarray:
    """Coerce scalars / nested lists to a float (n, n) array."""
    m = np.atleast_2d(np.asarray(value, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise DimensionError(f"expected a {n}x{n} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


@dataclass(frozen=True)
class MatrixCurve:
    """A map ``t -> (n, n)`` array.

    ``fn`` takes ``t`` alone, or ``(t, mu)`` when ``mu_aware`` is set.
    """

    fn: Callable
    n: int
    mu_aware: bool = False
    ts: Optional[object] = field(default=None, compare=False)
    constant: bool = False

    def __call__(self, t, mu=None) -> np.ndarray:
        if not self.mu_aware:
            return self.fn(t)
        if mu is None:
            if self.ts is None:
                raise ValueError("graininess-aware curve evaluated without mu and without a time scale")
            mu = self.ts.mu(t)
        return self.fn(t, mu)

    @classmethod
    def const(cls, M) -> "MatrixCurve":
        M = as_matrix(M)
        M.setflags(write=False)
        return cls(lambda t: M, M.shape[0], constant=True)

    @classmethod
    def from_function(cls, fn, n) -> "MatrixCurve":
        return cls(lambda t: as_matrix(fn(t), n), n)

    def transpose(self) -> "MatrixCurve":
        if self.mu_aware:
            return MatrixCurve(lambda t, mu: self.fn(t, mu).T, self.n, True, self.ts, self.constant)
        return MatrixCurve(lambda t: self.fn(t).T, self.n, False, self.ts, self.constant)


@dataclass(frozen=True)
class MatrixField:
    """Right-hand side ``F(t, P)`` of a matrix dynamic equation.

    ``partials``, when given, maps ``(t, P)`` (or ``(t, P, mu)``) to an
    ``(n, n, n, n)`` array whose ``[i, j]`` slice is ``dF/dp_ij``.
    """

    fn: Callable
    n: int
    partials: Optional[Callable] = None
    mu_aware: bool = False
    ts: Optional[object] = field(default=None, compare=False)

    def _mu(self, t, mu):
        if mu is None:
            if self.ts is None:
                raise ValueError("graininess-aware field evaluated without mu and without a time scale")
            mu = self.ts.mu(t)
        return mu

    def __call__(self, t, P, mu=None) -> np.ndarray:
        if self.mu_aware:
            return self.fn(t, P, self._mu(t, mu))
        return self.fn(t, P)

    def jacobian(self, t, P, mu=None, step=1e-6) -> np.ndarray:
        """All partial derivatives dF/dp_ij; analytic if available, else central differences."""
        P = np.asarray(P, dtype=float)
        if self.partials is not None:
            if self.mu_aware:
                return np.asarray(self.partials(t, P, self._mu(t, mu)), dtype=float)
            return np.asarray(self.partials(t, P), dtype=float)
        n = self.n
        out = np.empty((n, n, n, n))
        for i in range(n):
            for j in range(n):
                h = step * max(1.0, abs(P[i, j]))
                Pp = P.copy()
                Pm = P.copy()
                Pp[i, j] += h
                Pm[i, j] -= h
                out[i, j] = (self(t, Pp, mu) - self(t, Pm, mu)) / (2 * h)
        return out
