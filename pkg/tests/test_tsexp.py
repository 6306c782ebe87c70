import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from tsmatrix.curves import MatrixCurve
from tsmatrix.errors import CommutationError, DomainError, RegressivityError
from tsmatrix.timescale import GridSpec, TimeScale
from tsmatrix.tsexp import exp_commuting, exp_identity_suite, exp_ode, exp_ode_path

DIAG = MatrixCurve.const(np.diag([1.0, 2.0]))
JORDAN = MatrixCurve.const(np.array([[1.0, 1.0], [0.0, 1.0]]))
TWISTED = MatrixCurve(lambda t: np.array([[0.0, 1.0], [-1.0 - t, 0.1 * t]]), 2)


def ivp_oracle(K, t0, t1, Y0):
    """Reference solution of Y' = K(t) Y from scipy's adaptive integrator."""
    n = Y0.shape[0]
    sol = solve_ivp(lambda t, y: (K(t) @ y.reshape(n, n)).ravel(), (t0, t1), Y0.ravel(),
                    method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[:, -1].reshape(n, n)


class TestExamples:
    @pytest.mark.parametrize("fn", [exp_ode, exp_commuting])
    def test_zero_generator(self, fn, mixed_ts):
        Z = MatrixCurve.const(np.zeros((2, 2)))
        for t, a in [(2.0, 0.0), (0.5, 1.5), (0.75, 0.75)]:
            assert np.allclose(fn(Z, mixed_ts, t, a), np.eye(2), rtol=0, atol=1e-15)

    @pytest.mark.parametrize("fn", [exp_ode, exp_commuting])
    def test_scalar_on_integers_is_power_of_two(self, fn):
        v = fn(MatrixCurve.const([[1.0]]), TimeScale.integers(0, 5), 3, 0)
        assert v[0, 0] == 8.0

    @pytest.mark.parametrize("fn", [exp_ode, exp_commuting])
    def test_diagonal_on_reals(self, fn):
        v = fn(DIAG, TimeScale.interval(0, 1), 1.0, 0.0)
        assert np.allclose(v, np.diag([math.e, math.e ** 2]), rtol=1e-10, atol=0)

    def test_ode_and_closed_form_agree(self):
        ts = TimeScale([(0, 1), 1.5, 2])
        # oracle: dense part exp(diag(1,2)), then jumps of size 0.5 at 1 and at 1.5
        oracle = np.diag([math.e * 1.5 ** 2, math.e ** 2 * 2.0 ** 2])
        assert np.allclose(exp_ode(DIAG, ts, 2.0, 0.0), oracle, rtol=1e-10)
        assert np.allclose(exp_commuting(DIAG, ts, 2.0, 0.0), oracle, rtol=1e-12)

    def test_constant_generator_matches_expm(self):
        ts = TimeScale.interval(-1, 1)
        assert np.allclose(exp_ode(JORDAN, ts, 1.0, -0.5), scipy.linalg.expm(1.5 * JORDAN(0)), rtol=1e-10)

    def test_time_ordered_product_on_mixed_scale(self, mixed_ts):
        Y = np.eye(2)
        for s in (0.0, 0.25, 0.5, 0.75):
            Y = (np.eye(2) + 0.25 * TWISTED(s)) @ Y
        oracle = ivp_oracle(TWISTED, 1.0, 2.0, Y)
        assert np.allclose(exp_ode(TWISTED, mixed_ts, 2.0, 0.0), oracle, rtol=1e-9, atol=1e-10)

    def test_backward_evaluation_is_inverse(self, mixed_ts):
        fwd = exp_ode(TWISTED, mixed_ts, 1.7, 0.25)
        back = exp_ode(TWISTED, mixed_ts, 0.25, 1.7)
        assert np.allclose(back @ fwd, np.eye(2), atol=1e-12)

    def test_path_matches_pointwise(self, mixed_ts):
        g, Y = exp_ode_path(TWISTED, mixed_ts, 0.0, 2.0, GridSpec(0.01))
        for k in (0, 3, 4, 60, len(g) - 1):
            assert np.allclose(Y[k], exp_ode(TWISTED, mixed_ts, float(g.times[k]), 0.0, GridSpec(0.01)), atol=1e-13)


class TestErrors:
    def test_non_commuting_family_rejected(self, mixed_ts):
        with pytest.raises(CommutationError, match="exp_ode"):
            exp_commuting(TWISTED, mixed_ts, 2.0, 0.0)

    def test_non_regressive_names_point(self):
        ts = TimeScale.integers(0, 4)
        K = MatrixCurve(lambda t: -np.eye(2) if t == 2 else np.eye(2), 2)
        with pytest.raises(RegressivityError) as exc:
            exp_ode(K, ts, 4, 0)
        assert exc.value.t == 2

    def test_points_outside(self, mixed_ts):
        with pytest.raises(DomainError):
            exp_ode(DIAG, mixed_ts, 0.3, 0.0)


class TestIdentitySuite:
    def test_zero_generators_give_zero_residuals(self, mixed_ts):
        Z = MatrixCurve.const(np.zeros((2, 2)))
        rep = exp_identity_suite(Z, Z, mixed_ts, [0.0, 0.5, 1.0, 1.5])
        assert all(v <= 1e-15 for v in rep.residuals.values())

    def test_scalar_integers_exact(self):
        K = MatrixCurve.const([[1.0]])
        rep = exp_identity_suite(K, MatrixCurve.const([[3.0]]), TimeScale.integers(0, 4), [0, 1, 2, 4])
        for key in ("sigma", "inverse", "semigroup", "product", "derivative"):
            assert rep.residuals[key] <= 1e-15, key

    def test_product_uses_circle_plus_factor(self):
        # with mu = 1 the jump factor of K (+) L is (1 + k)(1 + l) per diagonal entry
        ts = TimeScale.integers(0, 2)
        K, L = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
        KL = MatrixCurve(lambda t: K + L + K @ L, 2)
        assert np.allclose(exp_ode(KL, ts, 1, 0), np.diag([2 * 4, 3 * 5]))
        rep = exp_identity_suite(MatrixCurve.const(K), MatrixCurve.const(L), ts, [0, 1, 2])
        assert rep.residuals["product"] <= 1e-15

    def test_non_commuting_pair_skips_product(self, mixed_ts):
        rep = exp_identity_suite(JORDAN, MatrixCurve.const(np.diag([1.0, 2.0])), mixed_ts, [0.0, 1.5])
        assert "product" not in rep.residuals

    def test_witness_recorded(self, mixed_ts):
        rep = exp_identity_suite(DIAG, None, mixed_ts, [0.0, 0.75, 1.5])
        assert set(rep.worst) == set(rep.residuals)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0, 1.4, 2.0]))
def test_semigroup_property_random_generators(k1, k2, s):
    ts = TimeScale([0.0, 0.25, 0.5, 0.75, (1.0, 2.0)])
    K = MatrixCurve(lambda t: np.array([[k1, t], [0.5, k2]]), 2)
    g = GridSpec(0.01)
    lhs = exp_ode(K, ts, 2.0, s, g) @ exp_ode(K, ts, s, 0.0, g)
    assert np.allclose(lhs, exp_ode(K, ts, 2.0, 0.0, g), rtol=1e-9, atol=1e-9)
