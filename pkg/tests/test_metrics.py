"""ROC AUC, AUC ratio and accuracy"""

import numpy as np
import pytest

from src.models import ScoredDataset
from src.core.metrics import roc_auc, one_vs_rest_auc, auc_ratio, accuracy
from src.core.errors import MetricError, DimensionError, DatasetError

from oracles import brute_force_auc


class TestRocAuc:
    def test_small_example(self):
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_perfect_and_inverted(self):
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_all_tied(self):
        assert roc_auc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_matches_pair_count(self, rng):
        for _ in range(500):
            n = int(rng.integers(2, 40))
            labels = rng.integers(0, 2, n)
            labels[0], labels[1] = 0, 1
            # coarse scores force plenty of ties
            scores = rng.integers(0, 6, n) / 5.0
            assert roc_auc(scores, labels) == brute_force_auc(scores, labels)

    def test_invariant_under_monotone_map(self, rng):
        scores = rng.normal(size=200)
        labels = rng.integers(0, 2, 200)
        base = roc_auc(scores, labels)
        assert roc_auc(np.exp(scores), labels) == base
        assert roc_auc(3 * scores + 7, labels) == base
        assert roc_auc(-scores, labels) == pytest.approx(1 - base, abs=1e-12)

    def test_invariant_under_permutation(self, rng):
        scores = rng.normal(size=100)
        labels = rng.integers(0, 2, 100)
        order = rng.permutation(100)
        assert roc_auc(scores[order], labels[order]) == roc_auc(scores, labels)

    @pytest.mark.parametrize("labels", [[0, 0, 0], [1, 1, 1], []])
    def test_degenerate_labels(self, labels):
        with pytest.raises(MetricError, match="degenerate labels"):
            roc_auc([0.5] * len(labels), labels)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            roc_auc([0.1, 0.2], [0, 1, 1])


class TestOneVsRest:
    def test_single_column_is_binary(self):
        data = ScoredDataset(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0, 0, 1, 1]))
        assert list(one_vs_rest_auc(data)) == [0.75]

    def test_per_class(self):
        scores = np.array([
            [0.8, 0.1, 0.1],
            [0.2, 0.7, 0.1],
            [0.1, 0.2, 0.7],
            [0.6, 0.3, 0.1],
        ])
        labels = np.array([0, 1, 2, 0])
        aucs = one_vs_rest_auc(ScoredDataset(scores, labels))
        assert list(aucs) == [1.0, 1.0, 1.0]

    def test_labels_out_of_range(self):
        with pytest.raises(DatasetError):
            ScoredDataset(np.zeros((2, 3)), np.array([0, 3]))


class TestAucRatio:
    def test_identical_scores(self, rng):
        scores = rng.uniform(size=(50, 3))
        labels = rng.integers(0, 3, 50)
        labels[:3] = [0, 1, 2]
        data = ScoredDataset(scores, labels)
        assert list(auc_ratio(data, data)) == [1.0, 1.0, 1.0]

    def test_ratio(self):
        labels = np.array([0, 0, 1, 1])
        reference = ScoredDataset(np.array([0.1, 0.2, 0.8, 0.9]), labels)
        quantized = ScoredDataset(np.array([0.1, 0.4, 0.35, 0.8]), labels)
        assert list(auc_ratio(quantized, reference)) == [0.75]

    def test_mismatched_inputs(self):
        a = ScoredDataset(np.array([0.1, 0.9]), np.array([0, 1]))
        b = ScoredDataset(np.array([0.1, 0.9]), np.array([1, 0]))
        with pytest.raises(MetricError):
            auc_ratio(a, b)
        with pytest.raises(DimensionError):
            auc_ratio(a, ScoredDataset(np.zeros((2, 2)), np.array([0, 1])))

    def test_zero_reference(self):
        labels = np.array([0, 1])
        with pytest.raises(MetricError, match="zero"):
            auc_ratio(ScoredDataset(np.array([0.1, 0.9]), labels),
                      ScoredDataset(np.array([0.9, 0.1]), labels))


class TestAccuracy:
    def test_binary_threshold(self):
        data = ScoredDataset(np.array([0.2, 0.5, 0.7, 0.4]), np.array([0, 1, 1, 1]))
        assert accuracy(data) == 0.75

    def test_argmax(self):
        scores = np.array([[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]])
        assert accuracy(ScoredDataset(scores, np.array([0, 1]))) == 0.5

    def test_empty(self):
        with pytest.raises(MetricError):
            accuracy(ScoredDataset(np.zeros((0, 1)), np.zeros(0, dtype=int)))
