"""
RnnHlsProfiler - Classification Metrics
ROC AUC from midranks (binary and one-vs-rest), accuracy and the
quantized-over-float AUC ratio
"""

from typing import Any
import numpy as np
from scipy.stats import rankdata

from ..models import ScoredDataset
from .errors import MetricError, DimensionError


def roc_auc(scores: Any, labels: Any) -> float:
    """
    Area under the ROC curve.

    Equals the Mann-Whitney statistic: the fraction of (positive, negative)
    pairs whose positive score is higher, ties counted one half. Computed
    from midranks in O(n log n).

    Raises:
        MetricError: only one class present ("degenerate labels")
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise DimensionError(f"{scores.size} scores for {labels.size} labels")
    positive = labels.astype(bool)
    n_pos = int(np.count_nonzero(positive))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("degenerate labels")

    ranks = rankdata(scores)  # midranks for ties
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _score_matrix(data: ScoredDataset) -> np.ndarray:
    scores = np.asarray(data.scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    if scores.shape[0] != len(data.labels):
        raise DimensionError(f"{scores.shape[0]} score rows for {len(data.labels)} labels")
    return scores


def one_vs_rest_auc(data: ScoredDataset) -> np.ndarray:
    """
    Per-class AUC. A single score column is the binary case and yields one
    value; with k columns, class c is scored by column c against all others.
    """
    scores = _score_matrix(data)
    labels = np.asarray(data.labels).ravel()
    if scores.shape[1] == 1:
        return np.array([roc_auc(scores[:, 0], labels == 1)])
    return np.array([roc_auc(scores[:, c], labels == c) for c in range(scores.shape[1])])


def auc_ratio(quantized: ScoredDataset, reference: ScoredDataset) -> np.ndarray:
    """Elementwise AUC(quantized) / AUC(reference), one entry per class"""
    q_scores = _score_matrix(quantized)
    r_scores = _score_matrix(reference)
    if q_scores.shape != r_scores.shape:
        raise DimensionError(f"score shapes differ: {q_scores.shape} vs {r_scores.shape}")
    if not np.array_equal(np.asarray(quantized.labels), np.asarray(reference.labels)):
        raise MetricError("quantized and reference labels differ")

    ref = one_vs_rest_auc(reference)
    if np.any(ref == 0.0):
        raise MetricError("reference AUC is zero")
    return one_vs_rest_auc(quantized) / ref


def accuracy(data: ScoredDataset) -> float:
    """Top-1 accuracy; a single score column is thresholded at 0.5"""
    scores = _score_matrix(data)
    labels = np.asarray(data.labels).ravel()
    if labels.size == 0:
        raise MetricError("empty dataset")
    if scores.shape[1] == 1:
        predicted = (scores[:, 0] >= 0.5).astype(labels.dtype)
    else:
        predicted = np.argmax(scores, axis=1)
    return float(np.mean(predicted == labels))


__all__ = [
    'roc_auc',
    'one_vs_rest_auc',
    'auc_ratio',
    'accuracy',
]
