import numpy as np
import pytest

from dmfaw import metrics
from dmfaw.exceptions import DimensionError

from oracles import brute_force_accuracy, contingency_nmi, contingency_purity


class TestAccuracy:
    def test_label_swap_invariance(self):
        assert metrics.accuracy([1, 1, 0, 0], [0, 0, 1, 1]) == 1.0

    def test_single_cluster(self):
        assert metrics.accuracy([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n = rng.integers(2, 13)
            k = rng.integers(1, 7)
            pred = rng.integers(0, k, n)
            truth = rng.integers(0, k, n)
            assert metrics.accuracy(pred, truth) == pytest.approx(
                brute_force_accuracy(pred, truth), abs=1e-12
            )

    def test_unequal_cluster_counts(self):
        pred = [0, 1, 2, 3]
        truth = [0, 0, 1, 1]
        assert metrics.accuracy(pred, truth) == pytest.approx(
            brute_force_accuracy(pred, truth), abs=1e-12
        )

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            metrics.accuracy([0, 1], [0, 1, 2])


class TestNmi:
    def test_identical_partitions(self):
        assert metrics.nmi([0, 1, 0, 2], [5, 7, 5, 9]) == 1.0

    def test_independent_partitions(self):
        assert metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0

    def test_against_contingency_oracle(self):
        pred = [0, 0, 1, 1]
        truth = [0, 0, 0, 1]
        assert metrics.nmi(pred, truth) == pytest.approx(
            contingency_nmi(pred, truth), abs=1e-12
        )

    def test_random_cases_match_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(60):
            n = rng.integers(2, 15)
            pred = rng.integers(0, 4, n).tolist()
            truth = rng.integers(0, 4, n).tolist()
            assert metrics.nmi(pred, truth) == pytest.approx(
                contingency_nmi(pred, truth), abs=1e-12
            )

    def test_both_constant(self):
        assert metrics.nmi([3, 3, 3], [1, 1, 1]) == 1.0

    def test_one_constant(self):
        assert metrics.nmi([0, 0, 0], [0, 1, 2]) == 0.0


class TestPurity:
    def test_perfect(self):
        assert metrics.purity([1, 0, 2], [4, 5, 6]) == 1.0

    def test_single_cluster_balanced(self):
        assert metrics.purity([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5

    def test_dominates_accuracy(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            n = rng.integers(2, 12)
            pred = rng.integers(0, 5, n)
            truth = rng.integers(0, 5, n)
            acc = metrics.accuracy(pred, truth)
            pur = metrics.purity(pred, truth)
            assert 0.0 <= acc <= pur <= 1.0
            assert pur == pytest.approx(contingency_purity(pred, truth), abs=1e-12)


class TestRelabelInvariance:
    def test_all_metrics(self):
        rng = np.random.default_rng(3)
        pred = rng.integers(0, 4, 30)
        truth = rng.integers(0, 3, 30)
        shuffled_pred = (pred * 7 + 3) % 11  # injective relabeling
        shuffled_truth = (truth + 5) * 2
        for fn in (metrics.accuracy, metrics.nmi, metrics.purity):
            assert fn(pred, truth) == pytest.approx(
                fn(shuffled_pred, shuffled_truth), abs=1e-12
            )


class TestPairwiseSimilarity:
    def test_one_hot_blocks(self):
        g = np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
        sim = metrics.pairwise_similarity(g)
        expected = np.array(
            [
                [1.0, 1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 1.0, 1.0],
            ]
        )
        np.testing.assert_allclose(sim, expected, atol=1e-12)

    def test_duplicated_columns(self):
        rng = np.random.default_rng(4)
        g = rng.standard_normal((3, 4))
        g[:, 1] = 2.0 * g[:, 0]
        sim = metrics.pairwise_similarity(g)
        assert sim[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((4, 9))
        sim = metrics.pairwise_similarity(g)
        assert np.linalg.norm(sim - sim.T) < 1e-12
        np.testing.assert_allclose(np.diag(sim), 1.0, atol=1e-10)
        assert np.all(sim <= 1 + 1e-12) and np.all(sim >= -1 - 1e-12)

    def test_ordering_groups_labels(self):
        g = np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
        labels = [1, 0, 1, 0]
        order = metrics.order_by_labels(labels)
        sim = metrics.pairwise_similarity(g, order)
        np.testing.assert_allclose(sim[:2, :2], 1.0, atol=1e-12)
        np.testing.assert_allclose(sim[2:, 2:], 1.0, atol=1e-12)

    def test_bad_order_rejected(self):
        with pytest.raises(ValueError):
            metrics.pairwise_similarity(np.eye(2), order=[0, 0])
