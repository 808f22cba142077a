"""External cluster-validity measures: accuracy, NMI, purity.

Accuracy maximizes agreement over label bijections by solving the
assignment problem on the confusion matrix. NMI normalizes mutual
information by the geometric mean of the two entropies (natural logs).
Also provides the pairwise-similarity matrix of a consensus partition.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DimensionError


def _check_pair(pred, truth):
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape[0] != truth.shape[0]:
        raise DimensionError(
            f"label vectors differ in length: {pred.shape[0]} vs {truth.shape[0]}"
        )
    if pred.shape[0] < 1:
        raise DimensionError("label vectors must be non-empty")
    return pred, truth


def contingency(pred, truth):
    """Counts table with one row per predicted label, one column per true label."""
    pred, truth = _check_pair(pred, truth)
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def accuracy(pred, truth):
    """Largest fraction of agreeing samples over all label bijections."""
    table = contingency(pred, truth)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / float(table.sum())


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth):
    """Mutual information normalized by the geometric mean of entropies.

    Conventions: natural logs, 0*log(0) = 0. If both partitions are
    constant they are identical, so the score is 1; if only one is
    constant the mutual information is 0 and so is the score.
    """
    table = contingency(pred, truth)
    n = table.sum()
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    h_pred = _entropy(row, n)
    h_truth = _entropy(col, n)
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    mask = table > 0
    pij = table[mask] / n
    outer = np.outer(row, col)[mask] / (float(n) * float(n))
    info = float((pij * np.log(pij / outer)).sum())
    if info <= 0.0 or h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    return info / np.sqrt(h_pred * h_truth)


def purity(pred, truth):
    """Fraction of samples in the majority true class of their cluster."""
    table = contingency(pred, truth)
    return float(table.max(axis=1).sum()) / float(table.sum())


def order_by_labels(labels):
    """Stable permutation putting samples with equal labels side by side."""
    return np.argsort(np.asarray(labels).ravel(), kind="stable")


def pairwise_similarity(g_star, order=None):
    """Cosine similarities between the columns of a consensus partition.

    Columns are l2-normalized (zero columns left as zero) and the Gram
    matrix is reordered by `order` (e.g. from `order_by_labels`) so that
    samples of one class form contiguous blocks.
    """
    g = np.asarray(g_star, dtype=np.float64)
    if g.ndim != 2:
        raise DimensionError("g_star must be 2-D (k x n)")
    if not np.isfinite(g).all():
        raise ValueError("g_star contains NaN or Inf entries")
    norms = np.linalg.norm(g, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    sim = (g / safe).T @ (g / safe)
    sim = 0.5 * (sim + sim.T)
    if order is not None:
        order = np.asarray(order)
        if sorted(order.tolist()) != list(range(g.shape[1])):
            raise ValueError("order must be a permutation of range(n)")
        sim = sim[np.ix_(order, order)]
    return sim
