"""Lloyd's k-means with k-means++ seeding.

Used for the clustering-based factor initialization and for the final
assignment on the consensus partition. Deterministic given a seed: restarts
draw from independently spawned generators and ties are broken by the lowest
restart index.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError


def as_seed_sequence(seed):
    """Accept an int seed or a pre-built SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass
class KmeansResult:
    labels: np.ndarray          # (n,) int64 cluster indices in [0, k)
    centroids: np.ndarray       # (k, dim)
    inertia: float              # sum of squared distances to assigned centroid
    n_iter: int = 0
    inertia_history: list = field(default_factory=list)


def _sq_dists(points, centroids):
    # (n, k) squared Euclidean distances
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_init(points, k, rng):
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = np.einsum("nd,nd->n", points - centroids[0], points - centroids[0])
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[c] = points[idx]
        new_d2 = np.einsum("nd,nd->n", points - centroids[c], points - centroids[c])
        np.minimum(d2, new_d2, out=d2)
    return centroids


def _repair_empty(points, centroids, labels, d2):
    """Reseed empty clusters with the points farthest from their centroids."""
    counts = np.bincount(labels, minlength=centroids.shape[0])
    if counts.min() > 0:
        return labels
    dist_own = d2[np.arange(points.shape[0]), labels]
    order = np.argsort(-dist_own, kind="stable")
    cursor = 0
    for c in np.flatnonzero(counts == 0):
        while cursor < order.size and counts[labels[order[cursor]]] <= 1:
            cursor += 1
        if cursor >= order.size:
            break
        donor = order[cursor]
        cursor += 1
        counts[labels[donor]] -= 1
        labels[donor] = c
        counts[c] = 1
        centroids[c] = points[donor]
    return labels


def _lloyd(points, k, rng, max_iter):
    n = points.shape[0]
    centroids = _plus_plus_init(points, k, rng)
    history = []
    prev_labels = None
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(points, centroids)
        labels = d2.argmin(axis=1)
        labels = _repair_empty(points, centroids, labels, d2)
        inertia = float(
            np.einsum(
                "nd,nd->",
                points - centroids[labels],
                points - centroids[labels],
            )
        )
        history.append(inertia)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        for c in range(k):
            mask = labels == c
            centroids[c] = points[mask].mean(axis=0)
    return labels, centroids, history[-1], it, history


def kmeans(points, k, seed=0, max_iter=300, n_init=10):
    """Best-of-`n_init` k-means++ runs on row-vector samples.

    Parameters
    ----------
    points : (n, dim) array
    k : number of clusters, 1 <= k <= n
    seed : RNG seed; identical inputs and seed give identical labels
    max_iter : Lloyd iteration cap per restart
    n_init : independent restarts, merged by minimum inertia
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise DimensionError("points must be 2-D (samples x features)")
    n = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise DimensionError(f"need at least k={k} points, got {n}")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    best = None
    for child in as_seed_sequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        labels, centroids, inertia, n_iter, history = _lloyd(
            points, k, rng, max_iter
        )
        if best is None or inertia < best.inertia:
            best = KmeansResult(
                labels=labels.astype(np.int64),
                centroids=centroids,
                inertia=inertia,
                n_iter=n_iter,
                inertia_history=history,
            )
    return best
