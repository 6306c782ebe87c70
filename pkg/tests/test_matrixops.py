import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from tsmatrix.curves import MatrixCurve
from tsmatrix.errors import DimensionError, RegressivityError
from tsmatrix.matrixops import (DEFAULT_TOL, Tolerances, Verdict, circle_minus, circle_minus_binary, circle_plus,
                                classify, is_invertible, is_positive_definite, is_positive_semidefinite,
                                is_regressive, loewner_leq, loewner_less, positive_definite_property_suite,
                                random_pd)
from tsmatrix.timescale import TimeScale

matrices = st.integers(1, 4).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-3, 3, allow_subnormal=False)))


def char_poly_eigs_2x2(M):
    """Eigenvalues of a symmetric 2x2 matrix from its characteristic polynomial."""
    a, b, d = M[0, 0], M[0, 1], M[1, 1]
    tr, det = a + d, a * d - b * b
    disc = np.sqrt(tr * tr / 4 - det)
    return tr / 2 - disc, tr / 2 + disc


class TestDefiniteness:
    def test_identity(self):
        assert is_positive_definite(np.eye(2))

    def test_scaled_identity(self):
        assert is_positive_definite(np.diag([2.0, 2.0]))

    def test_indefinite_symmetric(self):
        M = np.array([[1.0, 2.0], [2.0, 1.0]])
        assert char_poly_eigs_2x2(M) == (-1.0, 3.0)
        assert not is_positive_definite(M)

    def test_skew_part_is_ignored(self):
        assert is_positive_definite(np.array([[1.0, 5.0], [-5.0, 1.0]]))

    def test_semidefinite_boundary(self):
        M = np.diag([1.0, 0.0])
        assert is_positive_semidefinite(M) and not is_positive_definite(M)


class TestLoewner:
    def test_examples(self):
        I = np.eye(2)
        assert loewner_leq(I, 2 * I)
        assert not loewner_leq(2 * I, I)
        assert not loewner_leq(np.diag([1.0, 3.0]), np.diag([2.0, 2.0]))

    def test_strict_ties_are_indeterminate(self):
        I = np.eye(2)
        assert loewner_less(I, I) is Verdict.INDETERMINATE
        assert loewner_less(I, I + 1e-13) is Verdict.INDETERMINATE
        assert loewner_less(I, 2 * I) is Verdict.PASS
        assert loewner_less(2 * I, I) is Verdict.FAIL

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            loewner_leq(np.eye(2), np.eye(3))

    def test_classify_band(self):
        assert classify(-1e-11, 1.0) is Verdict.PASS
        assert classify(-1e-9, 1.0) is Verdict.FAIL
        assert classify(1e-11, 1.0, strict=True) is Verdict.INDETERMINATE

    def test_tolerances_validated(self):
        with pytest.raises(ValueError):
            Tolerances(psd_tol=-1)


class TestRegressivity:
    def test_identity_is_regressive(self, mixed_ts):
        assert is_regressive(MatrixCurve.const(np.eye(2)), mixed_ts)

    def test_minus_identity_on_integers(self):
        assert not is_regressive(MatrixCurve.const(-np.eye(2)), TimeScale.integers(0, 3))

    def test_minus_identity_on_reals(self):
        assert is_regressive(MatrixCurve.const(-np.eye(2)), TimeScale.interval(0, 1))

    def test_invertibility_scale_free(self):
        assert is_invertible(1e-8 * np.eye(3))
        assert not is_invertible(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]))


class TestCircleAlgebra:
    def test_plus_examples(self):
        A, B = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
        assert np.array_equal(circle_plus(A, B, 0.0), A + B)
        assert circle_plus([[1.0]], [[1.0]], 1.0)[0, 0] == 3.0
        # entrywise a + b + mu*a*b
        assert np.allclose(circle_plus(A, B, 0.5), np.diag([1 + 3 + 1.5, 2 + 4 + 4.0]))

    def test_minus_examples(self):
        A = np.diag([1.0, 3.0])
        assert np.array_equal(circle_minus(A, 0.0), -A)
        assert circle_minus([[1.0]], 1.0)[0, 0] == -0.5
        assert np.allclose(circle_minus(A, 0.5), np.diag([-2 / 3, -6 / 5]))

    def test_minus_singular(self):
        with pytest.raises(RegressivityError):
            circle_minus(-np.eye(2), 1.0)

    def test_binary_examples(self):
        A = np.diag([1.0, 2.0])
        assert np.array_equal(circle_minus_binary(A, 2 * A, 0.0), -A)
        assert np.allclose(circle_minus_binary(A, A, 0.7), 0, atol=1e-15)
        assert circle_minus_binary([[3.0]], [[1.0]], 1.0)[0, 0] == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            circle_plus(np.eye(2), np.eye(3), 0.1)


@given(matrices, st.floats(0, 2))
def test_circle_minus_is_group_inverse(A, mu):
    assume(is_invertible(np.eye(len(A)) + mu * A) and np.linalg.cond(np.eye(len(A)) + mu * A) < 1e6)
    Z = circle_plus(A, circle_minus(A, mu), mu)
    assert np.max(np.abs(Z)) <= 1e-9 * max(1.0, np.max(np.abs(A))) * np.linalg.cond(np.eye(len(A)) + mu * A)


@given(matrices.flatmap(lambda A: st.tuples(st.just(A), arrays(np.float64, A.shape, elements=st.floats(-3, 3)))),
       st.floats(0, 2))
def test_plus_factorises(AB, mu):
    A, B = AB
    I = np.eye(len(A))
    lhs = I + mu * circle_plus(A, B, mu)
    rhs = (I + mu * A) @ (I + mu * B)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@given(matrices, st.floats(0, 2))
def test_binary_minus_matches_composition(A, mu):
    B = A.T + np.eye(len(A))
    M = np.eye(len(A)) + mu * B
    assume(np.linalg.cond(M) < 1e6)
    assert np.allclose(circle_minus_binary(A, B, mu), circle_plus(A, circle_minus(B, mu), mu), atol=1e-8)


@given(st.integers(0, 2**31), st.integers(1, 5))
def test_loewner_reflexive_transitive(seed, n):
    rng = np.random.default_rng(seed)
    A = random_pd(rng, n)
    B = A + random_pd(rng, n, 0.0)
    C = B + random_pd(rng, n, 0.0)
    assert loewner_leq(A, A)
    assert loewner_leq(A, B) and loewner_leq(B, C) and loewner_leq(A, C)


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_positive_definite_implies_regressive(seed, n):
    M = random_pd(np.random.default_rng(seed), n)
    assert is_positive_definite(M)
    assert is_regressive(MatrixCurve.const(M), TimeScale([0, 0.5, (1, 2), 7]))


class TestPropertySuite:
    def test_small_run_passes(self):
        rep = positive_definite_property_suite(50, 3, seed=7)
        assert rep.all_passed and rep.worst_psd_margin > 0
        assert set(rep.passed) == {"inverse", "scaling", "eigenvalues", "det_trace", "sums_products",
                                   "commuting_product", "inverse_order", "beta_bound"}

    def test_deterministic(self):
        a = positive_definite_property_suite(20, 2, seed=3)
        b = positive_definite_property_suite(20, 2, seed=3)
        assert a.worst_margin == b.worst_margin

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            positive_definite_property_suite(0, 2, 0)

    def test_diagonal_examples(self):
        A = np.diag([2.0, 1.0])
        assert is_positive_definite(A - 0.5 * np.eye(2))
        A, B = np.diag([4.0, 1.0]), np.eye(2)
        assert loewner_leq(B, A)
        assert np.allclose(np.linalg.inv(B) - np.linalg.inv(A), np.diag([0.75, 0.0]))
        assert is_positive_semidefinite(np.linalg.inv(B) - np.linalg.inv(A))

    def test_default_tolerances(self):
        assert DEFAULT_TOL.psd_tol == 1e-10 and DEFAULT_TOL.eq_tol == 1e-9
