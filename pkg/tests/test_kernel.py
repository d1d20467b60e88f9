import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pidlab.errors import InvalidInputError, NumericalFailure
from pidlab.kernel import (
    QueryKeyPair,
    StochasticKernel,
    build_softmax_kernel,
    eigenvalues,
    hessenberg,
    left_perron_vector,
    matrix_exponential,
    random_kernel,
    random_query_key,
    softmax_attention_step,
)


def match_eigenvalues(found, expected):
    """Greedy nearest matching; returns the worst pairwise distance."""
    remaining = list(expected)
    worst = 0.0
    for z in found:
        i = int(np.argmin([abs(z - w) for w in remaining]))
        worst = max(worst, abs(z - remaining.pop(i)))
    assert not remaining
    return worst


def rk4_matrix_flow(a, t, dt):
    y = np.eye(a.shape[0])
    for _ in range(int(round(t / dt))):
        k1 = a @ y
        k2 = a @ (y + 0.5 * dt * k1)
        k3 = a @ (y + 0.5 * dt * k2)
        k4 = a @ (y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


class TestSoftmaxKernel:
    def test_zero_scores_give_uniform_rows(self):
        k = build_softmax_kernel(QueryKeyPair(np.zeros((3, 2)), np.zeros((3, 2))))
        np.testing.assert_array_equal(k.weights, np.full((3, 3), 1 / 3))

    def test_single_token(self):
        k = build_softmax_kernel(QueryKeyPair([[0.3, -2.0]], [[1.0, 5.0]]))
        np.testing.assert_array_equal(k.weights, [[1.0]])

    def test_matches_extended_precision(self):
        rng = np.random.default_rng(7)
        qk = random_query_key(rng, 4, 2)
        k = build_softmax_kernel(qk)
        mpmath.mp.dps = 40
        for i in range(4):
            scores = [mpmath.mpf(float(qk.queries[i] @ qk.keys[j])) * mpmath.mpf(qk.scale) for j in range(4)]
            denom = mpmath.fsum(mpmath.exp(s) for s in scores)
            for j in range(4):
                assert abs(float(mpmath.exp(scores[j]) / denom) - k.weights[i, j]) < 1e-15
        assert np.all(k.weights > 0)
        assert np.max(np.abs(k.weights.sum(axis=1) - 1)) < 1e-12

    def test_large_scores_do_not_overflow(self):
        q = np.array([[400.0], [-400.0]])
        k = build_softmax_kernel(QueryKeyPair(q, np.array([[1.0], [1.001]])))
        assert np.all(np.isfinite(k.weights))

    def test_non_finite_input_rejected(self):
        with pytest.raises(InvalidInputError):
            QueryKeyPair([[np.nan]], [[1.0]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            QueryKeyPair(np.zeros((3, 2)), np.zeros((3, 3)))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
    def test_positive_and_row_stochastic(self, n, d, seed, spread):
        rng = np.random.default_rng(seed)
        qk = QueryKeyPair(spread * rng.standard_normal((n, d)), spread * rng.standard_normal((n, d)))
        w = build_softmax_kernel(qk).weights
        assert w.min() > 0
        assert np.max(np.abs(w.sum(axis=1) - 1)) < 1e-12


class TestStochasticKernelType:
    def test_rejects_zero_entry(self):
        with pytest.raises(InvalidInputError):
            StochasticKernel([[1.0, 0.0], [0.5, 0.5]])

    def test_rejects_bad_row_sum(self):
        with pytest.raises(InvalidInputError):
            StochasticKernel([[0.6, 0.5], [0.5, 0.5]])

    def test_weights_are_read_only(self):
        k = StochasticKernel([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(ValueError):
            k.weights[0, 0] = 1.0


class TestAttentionStep:
    def test_uniform_kernel_averages(self, rng):
        v = rng.standard_normal((5, 3))
        out = softmax_attention_step(np.full((5, 5), 0.2), v)
        np.testing.assert_allclose(out, np.tile(v.mean(axis=0), (5, 1)), atol=1e-15)

    def test_single_token_identity(self):
        v = np.array([[1.5, -2.0]])
        np.testing.assert_array_equal(softmax_attention_step([[1.0]], v), v)

    def test_row_is_weighted_sum(self, rng):
        k = random_kernel(rng, 4)
        v = rng.standard_normal((4, 3))
        out = softmax_attention_step(k, v)
        for i in range(4):
            np.testing.assert_allclose(out[i], sum(k.weights[i, j] * v[j] for j in range(4)), atol=1e-14)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            softmax_attention_step(random_kernel(rng, 3), np.ones((4, 2)))


class TestMatrixExponential:
    def test_zero_matrix(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3)), 7.0), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(
            matrix_exponential(np.diag([-1.0, -2.0]), 1.0), np.diag([np.exp(-1), np.exp(-2)]), rtol=1e-14
        )

    def test_matches_rk4_flow(self):
        a = np.random.default_rng(11).standard_normal((4, 4))
        ref = rk4_matrix_flow(a, 1.0, 1e-4)
        assert np.max(np.abs(matrix_exponential(a, 1.0) - ref)) / np.max(np.abs(ref)) < 1e-8

    def test_rotation_generator(self):
        e = matrix_exponential([[0.0, -1.0], [1.0, 0.0]], np.pi / 3)
        c, s = np.cos(np.pi / 3), np.sin(np.pi / 3)
        np.testing.assert_allclose(e, [[c, -s], [s, c]], atol=1e-15)

    def test_non_normal_jordan_block(self):
        # exp(t [[a, 1], [0, a]]) = e^{at} [[1, t], [0, 1]]
        e = matrix_exponential([[-0.7, 1.0], [0.0, -0.7]], 3.0)
        np.testing.assert_allclose(e, np.exp(-2.1) * np.array([[1.0, 3.0], [0.0, 1.0]]), rtol=1e-13)

    def test_large_norm_relative_accuracy(self):
        a = np.diag([-30.0, 2.0, 5.0])
        np.testing.assert_allclose(matrix_exponential(a, 2.0), np.diag(np.exp([-60.0, 4.0, 10.0])), rtol=1e-11)

    def test_non_square_rejected(self):
        with pytest.raises(InvalidInputError):
            matrix_exponential(np.ones((2, 3)), 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 2), st.floats(0, 2))
    def test_semigroup(self, seed, s, t):
        a = np.random.default_rng(seed).standard_normal((4, 4))
        lhs = matrix_exponential(a, s + t)
        rhs = matrix_exponential(a, s) @ matrix_exponential(a, t)
        assert np.max(np.sum(np.abs(lhs - rhs), axis=1)) < 1e-8 * max(1.0, np.max(np.abs(lhs)))


class TestPerronVector:
    def test_uniform(self):
        np.testing.assert_allclose(left_perron_vector(np.full((4, 4), 0.25)), np.full(4, 0.25), atol=1e-15)

    def test_symmetric_doubly_stochastic(self):
        np.testing.assert_allclose(left_perron_vector([[0.9, 0.1], [0.1, 0.9]]), [0.5, 0.5], atol=1e-12)

    def test_matches_direct_solve(self, rng):
        k = random_kernel(rng, 5).weights
        pi = left_perron_vector(k)
        # (K^T - I) pi = 0 with sum(pi) = 1, solved as a bordered least-squares system
        system = np.vstack([k.T - np.eye(5), np.ones((1, 5))])
        rhs = np.concatenate([np.zeros(5), [1.0]])
        ref = np.linalg.lstsq(system, rhs, rcond=None)[0]
        np.testing.assert_allclose(pi, ref, atol=1e-11)
        assert np.max(np.abs(pi @ k - pi)) < 1e-10
        assert np.all(pi > 0) and abs(pi.sum() - 1) < 1e-14

    def test_iteration_cap_reports_residual(self, rng):
        with pytest.raises(NumericalFailure) as info:
            left_perron_vector(random_kernel(rng, 6), max_iter=2)
        assert info.value.residual is not None

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2**32 - 1))
    def test_fixed_point(self, n, seed):
        k = random_kernel(np.random.default_rng(seed), n).weights
        pi = left_perron_vector(k)
        assert np.max(np.abs(k.T @ pi - pi)) < 1e-10


class TestEigenvalues:
    def test_diagonal(self):
        ev = eigenvalues(np.diag([3.0, -1.0, 0.5])).eigenvalues
        assert match_eigenvalues(ev, [3.0, -1.0, 0.5]) < 1e-14

    def test_rotation(self):
        spec = eigenvalues([[0.0, -1.0], [1.0, 0.0]])
        assert match_eigenvalues(spec.eigenvalues, [1j, -1j]) < 1e-14
        assert abs(spec.spectral_abscissa) < 1e-14

    def test_one_by_one(self):
        assert eigenvalues([[4.2]]).eigenvalues.tolist() == [4.2]

    def test_zero_matrix(self):
        assert np.all(eigenvalues(np.zeros((4, 4))).eigenvalues == 0)

    def test_repeated_and_defective(self):
        ev = eigenvalues([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]]).eigenvalues
        assert np.max(np.abs(ev - 2.0)) < 1e-5  # defective triple: error ~ eps^(1/3)

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 16, 40])
    def test_against_lapack(self, n):
        a = np.random.default_rng(n).standard_normal((n, n))
        spec = eigenvalues(a)
        assert len(spec) == n
        assert match_eigenvalues(spec.eigenvalues, np.linalg.eigvals(a)) < 1e-8
        assert spec.spectral_abscissa == pytest.approx(np.max(np.linalg.eigvals(a).real), abs=1e-8)

    def test_hessenberg_is_similar(self, rng):
        a = rng.standard_normal((7, 7))
        h = hessenberg(a)
        assert np.all(np.tril(h, -2) == 0)
        assert match_eigenvalues(np.linalg.eigvals(h), np.linalg.eigvals(a)) < 1e-10

    def test_sweep_cap(self, rng):
        with pytest.raises(NumericalFailure):
            eigenvalues(rng.standard_normal((6, 6)), max_sweeps=1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2**32 - 1))
    def test_stochastic_kernel_spectrum(self, n, seed):
        k = random_kernel(np.random.default_rng(seed), n).weights
        ev = eigenvalues(k).eigenvalues
        near_one = np.abs(ev - 1.0) < 1e-8
        assert near_one.sum() == 1
        assert np.all(np.abs(ev[~near_one]) < 1)
        shifted = eigenvalues(k - np.eye(n)).eigenvalues.real
        assert np.all(shifted >= -2 - 1e-8) and np.all(shifted <= 1e-8)
