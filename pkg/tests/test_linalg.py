import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from astute.linalg import (
    SingularSystemError,
    frobenius_norm,
    pairwise_sq_dist,
    spectral_norm,
    weighted_least_squares,
)

from oracles import loop_pairwise_sq_dist, ols_solve, svd_singular_values


class TestFrobeniusNorm:
    def test_identity(self):
        assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2.0))

    def test_diag_3_4(self):
        assert frobenius_norm(np.diag([3.0, 4.0])) == pytest.approx(5.0)

    def test_zero_matrix(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            frobenius_norm(np.zeros((0, 3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            frobenius_norm(np.array([[1.0, np.nan]]))

    def test_squared_norm_is_sum_of_squared_singular_values(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = rng.standard_normal((rng.integers(1, 7), rng.integers(1, 7)))
            sv = svd_singular_values(m)
            assert frobenius_norm(m) ** 2 == pytest.approx(
                float(np.sum(sv**2)), rel=1e-8
            )


class TestSpectralNorm:
    def test_diag_3_4(self):
        est = spectral_norm(np.diag([3.0, 4.0]))
        assert est.converged
        assert est.value == pytest.approx(4.0, abs=1e-10)

    def test_identity(self):
        est = spectral_norm(np.eye(5))
        assert est.converged
        assert est.value == pytest.approx(1.0, abs=1e-12)

    def test_zero_matrix(self):
        est = spectral_norm(np.zeros((4, 2)))
        assert est.value == 0.0 and est.converged

    def test_matches_svd_oracle_on_random_rectangular(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = rng.standard_normal((5, 3)) * rng.uniform(0.1, 10.0)
            est = spectral_norm(m)
            assert est.converged
            assert est.value == pytest.approx(svd_singular_values(m)[0], rel=1e-8)

    def test_start_vector_orthogonal_to_top_direction(self):
        # all-ones start is in the nullspace of this rank-1 matrix
        u = np.array([1.0, -1.0, 0.0])
        m = np.outer(u, u)
        est = spectral_norm(m)
        assert est.value == pytest.approx(2.0, rel=1e-8)

    def test_nonconvergence_returns_flagged_estimate(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((6, 6))
        est = spectral_norm(m, max_iter=1)
        assert not est.converged
        assert est.value <= frobenius_norm(m)

    def test_norm_sandwich(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = rng.standard_normal((rng.integers(2, 7), rng.integers(2, 7)))
            spec = spectral_norm(m).value
            fro = frobenius_norm(m)
            rank = np.linalg.matrix_rank(m)
            assert spec <= fro + 1e-12
            assert fro <= np.sqrt(rank) * spec + 1e-9


class TestWeightedLeastSquares:
    def test_identity_design(self):
        beta = weighted_least_squares(np.eye(2), [1.0, 2.0], [1.0, 1.0])
        np.testing.assert_allclose(beta, [1.0, 2.0], atol=1e-12)

    def test_recovers_exact_linear_data(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((30, 4))
        beta_true = rng.standard_normal(4)
        b = a @ beta_true
        w = rng.uniform(0.1, 3.0, size=30)
        beta = weighted_least_squares(a, b, w)
        np.testing.assert_allclose(beta, beta_true, atol=1e-9)

    def test_huge_ridge_shrinks_to_zero(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((20, 3))
        b = rng.standard_normal(20)
        beta = weighted_least_squares(a, b, np.ones(20), ridge=1e12)
        assert np.linalg.norm(beta) < 1e-6

    def test_uniform_weights_match_ols_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = rng.standard_normal((25, 5))
            b = rng.standard_normal(25)
            beta = weighted_least_squares(a, b, np.ones(25))
            np.testing.assert_allclose(beta, ols_solve(a, b), atol=1e-8)

    def test_singular_system_raises(self):
        a = np.ones((5, 2))  # duplicated column -> singular Gram
        with pytest.raises(SingularSystemError, match="ridge"):
            weighted_least_squares(a, np.ones(5), np.ones(5))

    def test_singular_system_rescued_by_ridge(self):
        a = np.ones((5, 2))
        beta = weighted_least_squares(a, np.ones(5), np.ones(5), ridge=1e-8)
        assert np.all(np.isfinite(beta))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            weighted_least_squares(np.eye(2), [1.0, 1.0], [1.0, -1.0])


class TestPairwiseSqDist:
    def test_single_point(self):
        np.testing.assert_array_equal(pairwise_sq_dist([[1.0, 2.0]]), [[0.0]])

    def test_two_points_analytic(self):
        d2 = pairwise_sq_dist([[0.0, 0.0], [3.0, 4.0]])
        assert d2[0, 1] == 25.0 and d2[1, 0] == 25.0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((10, 4))
        np.testing.assert_allclose(
            pairwise_sq_dist(x), loop_pairwise_sq_dist(x), atol=1e-10
        )

    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(min_value=1, max_value=12),
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_exactly_symmetric_nonnegative_zero_diagonal(self, n, d, seed):
        x = np.random.default_rng(seed).uniform(-100, 100, size=(n, d))
        d2 = pairwise_sq_dist(x)
        np.testing.assert_array_equal(d2, d2.T)
        assert np.all(d2 >= 0)
        assert np.all(np.diag(d2) == 0.0)
