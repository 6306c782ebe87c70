"""Bounded time scales: jump operators, graininess, grids, delta calculus.

A time scale is stored as a finite, sorted list of disjoint closed intervals
``[l, r]``; a degenerate interval ``[x, x]`` is an isolated point.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

#: absolute tolerance for membership tests
MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Sampling rule for dense segments; every scattered point is always a node."""

    dense_step: float = 1e-3

    def __post_init__(self):
        if not (self.dense_step > 0 and math.isfinite(self.dense_step)):
            raise ValueError(f"dense_step must be positive, got {self.dense_step}")

    def intervals(self, length: float) -> int:
        return max(1, math.ceil(length / self.dense_step - 1e-9))


class TimeScale:
    """A nonempty, bounded, closed subset of the reals with finitely many segments."""

    __slots__ = ("segments", "_lefts")

    def __init__(self, segments: Iterable[Sequence[float]]):
        segs = []
        for seg in segments:
            if np.ndim(seg) == 0:
                l = r = float(seg)
            else:
                if len(seg) != 2:
                    raise ValueError(f"interval must have two endpoints, got {seg!r}")
                l, r = float(seg[0]), float(seg[1])
            if not (math.isfinite(l) and math.isfinite(r)):
                raise ValueError("interval endpoints must be finite")
            if l > r:
                raise ValueError(f"interval endpoints out of order: [{l}, {r}]")
            segs.append((l, r))
        if not segs:
            raise ValueError("a time scale needs at least one point")
        for (l0, r0), (l1, r1) in zip(segs, segs[1:]):
            if not r0 + MEMBER_TOL < l1:
                raise ValueError(f"intervals must be sorted and separated: [{l0}, {r0}] then [{l1}, {r1}]")
        self.segments = tuple(segs)
        self._lefts = [s[0] for s in segs]

    # -- constructors -------------------------------------------------
    @classmethod
    def interval(cls, l, r):
        return cls([(l, r)])

    @classmethod
    def points(cls, pts):
        return cls([(p, p) for p in sorted(set(float(p) for p in pts))])

    @classmethod
    def integers(cls, lo, hi):
        return cls.points(range(int(lo), int(hi) + 1))

    @classmethod
    def from_config(cls, entries):
        return cls(entries)

    def to_config(self):
        return [l if l == r else [l, r] for l, r in self.segments]

    # -- basic queries ------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, TimeScale) and self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def __repr__(self):
        return f"TimeScale({self.to_config()!r})"

    @property
    def min(self) -> float:
        return self.segments[0][0]

    @property
    def max(self) -> float:
        return self.segments[-1][1]

    def _locate(self, t) -> int:
        """Index of the segment containing t (within MEMBER_TOL) or -1."""
        i = bisect.bisect_right(self._lefts, t + MEMBER_TOL) - 1
        if i >= 0 and t <= self.segments[i][1] + MEMBER_TOL:
            return i
        return -1

    def __contains__(self, t) -> bool:
        return self._locate(float(t)) >= 0

    def _index(self, t) -> int:
        i = self._locate(float(t))
        if i < 0:
            raise DomainError(f"t = {t!r} is not in the time scale {self.to_config()!r}")
        return i

    def sigma(self, t) -> float:
        i = self._index(t)
        l, r = self.segments[i]
        if t < r - MEMBER_TOL:
            return float(t)
        if i + 1 < len(self.segments):
            return self.segments[i + 1][0]
        return r

    def rho(self, t) -> float:
        i = self._index(t)
        l, r = self.segments[i]
        if t > l + MEMBER_TOL:
            return float(t)
        if i > 0:
            return self.segments[i - 1][1]
        return l

    def mu(self, t) -> float:
        i = self._index(t)
        l, r = self.segments[i]
        if t < r - MEMBER_TOL or i + 1 == len(self.segments):
            return 0.0
        return self.segments[i + 1][0] - r

    def is_right_scattered(self, t) -> bool:
        return self.mu(t) > 0.0

    def is_left_scattered(self, t) -> bool:
        i = self._index(t)
        return i > 0 and t <= self.segments[i][0] + MEMBER_TOL

    def kappa(self) -> "TimeScale":
        """T^kappa: drop the maximum when it is left-scattered."""
        if len(self.segments) > 1 and self.segments[-1][0] == self.segments[-1][1]:
            return TimeScale(self.segments[:-1])
        return self

    def in_kappa(self, t) -> bool:
        return t in self.kappa()

    def canonical(self, t) -> float:
        """Snap t to a segment endpoint when it lies within MEMBER_TOL of one."""
        l, r = self.segments[self._index(t)]
        if abs(t - l) <= MEMBER_TOL:
            return l
        if abs(t - r) <= MEMBER_TOL:
            return r
        return float(t)

    def restrict(self, lo, hi) -> "TimeScale":
        """The time-scale interval [lo, hi]_T; both ends must belong to the time scale."""
        if lo not in self or hi not in self:
            raise DomainError(f"[{lo}, {hi}] endpoints must lie in {self.to_config()!r}")
        lo, hi = self.canonical(lo), self.canonical(hi)
        if lo > hi:
            raise DomainError(f"empty range [{lo}, {hi}]")
        segs = [(max(l, lo), min(r, hi)) for l, r in self.segments if l <= hi and r >= lo]
        return TimeScale(segs)

    def scattered_points(self, lo=None, hi=None):
        """Right-scattered points s with lo <= s < hi."""
        lo = self.min if lo is None else lo
        hi = self.max if hi is None else hi
        pts = [r for l, r in self.segments[:-1]]
        return [p for p in pts if lo - MEMBER_TOL <= p < hi - MEMBER_TOL]

    def dense_measure(self, lo, hi) -> float:
        """Lebesgue measure of [lo, hi] intersected with the time scale."""
        total = 0.0
        for l, r in self.segments:
            a, b = max(l, lo), min(r, hi)
            if b > a:
                total += b - a
        return total

    def grid(self, spec: GridSpec = GridSpec()) -> "TimeGrid":
        return TimeGrid.build(self, spec)


class TimeGrid:
    """Materialised nodes of a time scale under a :class:`GridSpec`.

    ``times[k]`` are the nodes; step ``k -> k+1`` is either a jump of size
    ``mu[k] > 0`` (the node is right-scattered) or a dense step of size
    ``times[k+1] - times[k]`` inside one segment (``mu[k] == 0``).  Dense
    segments are uniformly subdivided, so each dense run has a constant step.
    """

    def __init__(self, times, mu, runs, ts):
        self.times = times
        self.mu = mu
        self.runs = runs  # list of (start, stop) node indices of dense runs
        self.ts = ts

    @classmethod
    def build(cls, ts: TimeScale, spec: GridSpec) -> "TimeGrid":
        times, runs = [], []
        for l, r in ts.segments:
            if l == r:
                times.append(l)
                continue
            N = spec.intervals(r - l)
            start = len(times)
            nodes = np.linspace(l, r, N + 1)
            nodes[-1] = r
            times.extend(nodes.tolist())
            runs.append((start, start + N))
        times = np.array(times)
        mu = np.zeros(len(times))
        in_run = np.zeros(len(times), dtype=bool)
        for s, e in runs:
            in_run[s:e] = True
        for k in range(len(times) - 1):
            if not in_run[k]:
                mu[k] = times[k + 1] - times[k]
        return cls(times, mu, runs, ts)

    def __len__(self):
        return len(self.times)

    def steps(self):
        """Yield ``(k, t_k, t_{k+1}, mu_k)``; ``mu_k > 0`` marks a jump."""
        t = self.times
        for k in range(len(t) - 1):
            yield k, float(t[k]), float(t[k + 1]), float(self.mu[k])


def cumulative_integral(grid: TimeGrid, dense_values, jump_values=None, start=None):
    """Running delta integral over the grid nodes, folded left from ``start``.

    ``dense_values[k]`` is the integrand at node k as seen from inside a dense
    segment (left limit); ``jump_values[k]`` is the integrand used for the jump
    ``mu_k * f`` at a right-scattered node (defaults to ``dense_values``).
    Dense runs use composite Simpson at even offsets and a three-point partial
    panel at odd offsets.
    """
    f = np.asarray(dense_values, dtype=float)
    g = f if jump_values is None else np.asarray(jump_values, dtype=float)
    Y = np.empty_like(f)
    Y[0] = 0.0 if start is None else start
    run_of = {s: e for s, e in grid.runs}
    k, N = 0, len(grid) - 1
    while k < N:
        if k in run_of:
            e = run_of[k]
            m = e - k
            h = (grid.times[e] - grid.times[k]) / m
            for j in range(1, m + 1):
                if j % 2 == 0:
                    Y[k + j] = Y[k + j - 2] + h / 3 * (f[k + j - 2] + 4 * f[k + j - 1] + f[k + j])
                elif j < m:
                    Y[k + j] = Y[k + j - 1] + h / 12 * (5 * f[k + j - 1] + 8 * f[k + j] - f[k + j + 1])
                elif m >= 2:
                    Y[k + j] = Y[k + j - 1] + h / 12 * (-f[k + j - 2] + 8 * f[k + j - 1] + 5 * f[k + j])
                else:
                    Y[k + j] = Y[k + j - 1] + h / 2 * (f[k + j - 1] + f[k + j])
            k = e
        else:
            Y[k + 1] = Y[k] + grid.mu[k] * g[k]
            k += 1
    return Y


# -- operations -------------------------------------------------------------

def sigma(ts: TimeScale, t) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t) -> float:
    return ts.rho(t)


def graininess(ts: TimeScale, t) -> float:
    return ts.mu(t)


def kappa_truncate(ts: TimeScale) -> TimeScale:
    return ts.kappa()


def _eval(curve, t, mu):
    if getattr(curve, "mu_aware", False):
        return np.asarray(curve(t, mu), dtype=float)
    return np.asarray(curve(t), dtype=float)


def delta_derivative(curve, ts: TimeScale, t, h=1e-5):
    """Delta derivative of ``curve`` at ``t``.

    Exact difference quotient at right-scattered points; otherwise a
    finite difference with step ``min(h, distance to the segment edge)``,
    falling back to second-order one-sided formulas at segment edges.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if not ts.in_kappa(t):
        raise DomainError(f"t = {t!r} is not in T^kappa of {ts.to_config()!r}")
    m = ts.mu(t)
    if m > 0:
        s = ts.sigma(t)
        return (_eval(curve, s, ts.mu(s)) - _eval(curve, t, m)) / m
    l, r = ts.segments[ts._index(t)]
    if l == r:
        # isolated maximum of a one-point scale; nothing to differentiate against
        raise DomainError(f"no delta derivative at isolated point {t!r}")
    f = lambda s: _eval(curve, s, 0.0)
    d = min(h, t - l, r - t)
    if d >= h / 4:
        return (f(t + d) - f(t - d)) / (2 * d)
    step = min(h, (r - l) / 2)
    if r - t >= t - l:
        return (-3 * f(t) + 4 * f(t + step) - f(t + 2 * step)) / (2 * step)
    return (3 * f(t) - 4 * f(t - step) + f(t - 2 * step)) / (2 * step)


def delta_integral(curve, ts: TimeScale, lo, hi, grid: GridSpec = GridSpec()):
    """Delta integral of ``curve`` over ``[lo, hi)``: jump sums plus Simpson on dense parts."""
    if lo not in ts or hi not in ts:
        raise DomainError(f"integration limits [{lo}, {hi}] must lie in the time scale")
    if hi < lo:
        raise DomainError("integration limits must satisfy lo <= hi")
    g = ts.restrict(lo, hi).grid(grid)
    dense = [_eval(curve, t, 0.0) for t in g.times]
    jump = [_eval(curve, t, m) if m > 0 else d for t, m, d in zip(g.times, g.mu, dense)]
    return cumulative_integral(g, dense, jump)[-1]
