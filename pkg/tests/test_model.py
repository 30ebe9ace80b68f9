"""Truth sampling, rank detection, dataset generation, exact losses."""

import math

import numpy as np
import pytest
from oracles import kl_monte_carlo, rational_intrinsic_rank

from lda_rlct.model import (
    Dataset,
    Token,
    TrueModel,
    empirical_entropy,
    generate_dataset,
    intrinsic_rank,
    kl_divergence,
    sample_true_model,
    token_log_prob,
    validate_stochastic,
)
from lda_rlct.rlct import InvalidShapeError


class TestValidation:
    def test_accepts_stochastic(self):
        rng = np.random.default_rng(0)
        mat = rng.dirichlet(np.ones(6), size=4).T
        assert validate_stochastic(mat) is not None

    def test_rejects_negative_entry(self):
        mat = np.array([[1.2, 0.5], [-0.2, 0.5]])
        with pytest.raises(InvalidShapeError, match="negative"):
            validate_stochastic(mat)

    def test_rejects_bad_column_sum(self):
        mat = np.array([[0.5, 0.5], [0.5, 0.5 + 1e-9]])
        with pytest.raises(InvalidShapeError, match="column 1"):
            validate_stochastic(mat)

    def test_tolerates_tiny_deviation(self):
        mat = np.array([[0.5, 0.5], [0.5, 0.5 + 1e-13]])
        validate_stochastic(mat)

    def test_token_bounds(self):
        with pytest.raises(InvalidShapeError):
            Token(doc=-1, word=0)

    def test_dataset_counts_must_match(self):
        with pytest.raises(InvalidShapeError, match="disagree"):
            Dataset(docs=np.array([0]), words=np.array([0]),
                    counts=np.array([[0, 0], [1, 0]]))


class TestIntrinsicRank:
    def test_single_topic_truth_has_rank_zero(self):
        rng = np.random.default_rng(1)
        model = sample_true_model(5, 4, 1, rng)
        assert intrinsic_rank(model.A0, model.B0) == 0
        assert model.B0.shape == (1, 4)
        assert np.allclose(model.B0, 1.0)

    def test_generic_rank(self):
        rng = np.random.default_rng(2)
        model = sample_true_model(10, 5, 2, rng)
        assert intrinsic_rank(model.A0, model.B0) == 1
        model = sample_true_model(6, 6, 4, rng)
        assert intrinsic_rank(model.A0, model.B0) == 3

    def test_duplicated_topic_columns_drop_rank(self):
        rng = np.random.default_rng(3)
        base = sample_true_model(8, 6, 3, rng)
        A0 = base.A0.copy()
        A0[:, 1] = A0[:, 2]  # two identical topics
        assert intrinsic_rank(A0, base.B0) == 1  # below the generic 2
        assert intrinsic_rank(A0, base.B0) == rational_intrinsic_rank(A0, base.B0)

    def test_agrees_with_rational_elimination(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            H0 = int(rng.integers(1, 5))
            M = int(rng.integers(max(2, H0), 8))
            N = int(rng.integers(max(2, H0), 8))
            A0 = rng.dirichlet(np.ones(M), size=H0).T
            B0 = rng.dirichlet(np.ones(H0), size=N).T
            assert intrinsic_rank(A0, B0) == rational_intrinsic_rank(A0, B0)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidShapeError, match="topics"):
            intrinsic_rank(np.full((3, 2), 1 / 3), np.full((3, 4), 1 / 3))


class TestSampleTrueModel:
    def test_shapes_and_determinism(self):
        a = sample_true_model(10, 5, 2, np.random.default_rng(7))
        b = sample_true_model(10, 5, 2, np.random.default_rng(7))
        assert a.A0.shape == (10, 2) and a.B0.shape == (2, 5)
        assert np.array_equal(a.A0, b.A0) and np.array_equal(a.B0, b.B0)
        assert np.allclose(a.doc_dist, 0.2)

    def test_requires_enough_words_and_docs(self):
        with pytest.raises(InvalidShapeError, match="full-rank"):
            sample_true_model(3, 2, 3, np.random.default_rng(0))

    def test_custom_doc_dist(self):
        dist = np.array([0.5, 0.25, 0.125, 0.125])
        model = sample_true_model(5, 4, 2, np.random.default_rng(0), doc_dist=dist)
        assert np.array_equal(model.doc_dist, dist)
        with pytest.raises(InvalidShapeError, match="positive"):
            sample_true_model(5, 4, 2, np.random.default_rng(0),
                              doc_dist=np.array([1.0, 0.0, 0.0, 0.0]))


class TestGenerateDataset:
    def test_counts_and_determinism(self):
        model = sample_true_model(10, 5, 2, np.random.default_rng(11))
        d1 = generate_dataset(model, 500, np.random.default_rng(12))
        d2 = generate_dataset(model, 500, np.random.default_rng(12))
        assert d1.n == 500
        assert d1.counts.sum() == 500
        assert np.array_equal(d1.docs, d2.docs)
        assert np.array_equal(d1.words, d2.words)

    def test_deterministic_truth_forces_word(self):
        # one-hot topics and words: doc j always emits word j
        A0 = np.eye(4)[:, :2]
        B0 = np.array([[1.0, 0.0], [0.0, 1.0]])
        model = TrueModel(A0=A0, B0=B0)
        data = generate_dataset(model, 200, np.random.default_rng(0))
        assert np.array_equal(data.words, data.docs)

    def test_cell_frequencies_converge(self):
        model = sample_true_model(6, 4, 2, np.random.default_rng(21))
        n = 100_000
        data = generate_dataset(model, n, np.random.default_rng(22))
        Q = model.word_dists()
        doc_sizes = data.counts.sum(axis=0)
        for j in range(model.N):
            freq = data.counts[:, j] / doc_sizes[j]
            assert np.all(np.abs(freq - Q[:, j]) < 4 / math.sqrt(doc_sizes[j]))


class TestTokenLogProb:
    def test_single_topic_reads_word_column(self):
        A = np.array([[0.2], [0.3], [0.5]])
        B = np.array([[1.0, 1.0]])
        assert token_log_prob(A, B, Token(doc=1, word=2)) == pytest.approx(
            math.log(0.5), rel=1e-15
        )

    def test_normalizes_per_document(self):
        rng = np.random.default_rng(31)
        model = sample_true_model(7, 4, 3, rng)
        for j in range(model.N):
            total = sum(
                math.exp(token_log_prob(model.A0, model.B0, Token(doc=j, word=i)))
                for i in range(model.M)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_zero_probability_is_floored(self):
        A = np.array([[1.0], [0.0]])
        B = np.array([[1.0, 1.0]])
        value = token_log_prob(A, B, Token(doc=0, word=1))
        assert math.isfinite(value) and value <= math.log(1e-300) + 1e-9


class TestKlDivergence:
    def test_zero_against_itself(self):
        model = sample_true_model(8, 5, 3, np.random.default_rng(41))
        assert kl_divergence(model.A0, model.B0, model) == pytest.approx(0.0, abs=1e-14)

    def test_zero_for_padded_and_permuted(self):
        model = sample_true_model(8, 5, 3, np.random.default_rng(42))
        # duplicate a topic with zero weight: same word distributions
        A = np.hstack([model.A0, model.A0[:, -1:]])
        B = np.vstack([model.B0, np.zeros((1, model.N))])
        assert kl_divergence(A, B, model) == pytest.approx(0.0, abs=1e-13)
        perm = [2, 0, 1]
        assert kl_divergence(model.A0[:, perm], model.B0[perm, :], model) == (
            pytest.approx(0.0, abs=1e-13)
        )

    def test_nonnegative(self):
        rng = np.random.default_rng(43)
        model = sample_true_model(6, 4, 2, rng)
        for _ in range(20):
            A = rng.dirichlet(np.ones(6), size=3).T
            B = rng.dirichlet(np.ones(3), size=4).T
            assert kl_divergence(A, B, model) >= 0

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(44)
        model = sample_true_model(6, 4, 2, rng)
        A = rng.dirichlet(np.ones(6) * 5, size=3).T
        B = rng.dirichlet(np.ones(3) * 5, size=4).T
        exact = kl_divergence(A, B, model)
        mc, se = kl_monte_carlo(model.A0, model.B0, model.doc_dist, A, B,
                                100_000, rng)
        assert abs(exact - mc) < 3 * se


class TestEmpiricalEntropy:
    def test_deterministic_truth_has_zero_entropy(self):
        A0 = np.eye(3)[:, :2]
        B0 = np.array([[1.0, 0.0], [0.0, 1.0]])
        model = TrueModel(A0=A0, B0=B0)
        data = generate_dataset(model, 100, np.random.default_rng(0))
        assert empirical_entropy(data, model) == pytest.approx(0.0, abs=1e-15)

    def test_uniform_truth_gives_log_m(self):
        M = 4
        model = TrueModel(A0=np.full((M, 1), 1 / M), B0=np.ones((1, 3)))
        data = generate_dataset(model, 50, np.random.default_rng(1))
        assert empirical_entropy(data, model) == pytest.approx(math.log(M), rel=1e-12)

    def test_converges_to_conditional_entropy(self):
        model = sample_true_model(6, 4, 2, np.random.default_rng(51))
        n = 100_000
        data = generate_dataset(model, n, np.random.default_rng(52))
        Q = model.word_dists()
        exact = float(
            model.doc_dist @ np.where(Q > 0, -Q * np.log(np.maximum(Q, 1e-300)), 0.0).sum(axis=0)
        )
        # per-token log-loss has bounded variance here; 4 sigma margin
        spread = float(np.std(np.log(Q[data.words, data.docs]), ddof=1))
        assert abs(empirical_entropy(data, model) - exact) < 4 * spread / math.sqrt(n)
