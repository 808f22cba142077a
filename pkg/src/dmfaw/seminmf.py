"""Single-layer semi-NMF and the cascaded warm start built from it.

Factorizes x (d x n, mixed signs allowed) into f @ g with g >= 0. The
mapping f is solved exactly through the pseudo-inverse, the partition g by
the ratio-of-signed-parts multiplicative rule, which keeps g non-negative
and never increases the squared reconstruction error.
"""

from dataclasses import dataclass

import numpy as np

from . import backend, linalg
from .exceptions import DimensionError
from .kmeans import as_seed_sequence, kmeans

INDICATOR_OFFSET = 0.2
DENOM_FLOOR = 1e-12


@dataclass
class SemiNmfResult:
    f: np.ndarray                # (d, k) mapping, mixed signs
    g: np.ndarray                # (k, n) partition, entrywise >= 0
    objective_history: list      # ||x - f g||_F^2 after each alternation
    n_iter: int


@dataclass
class ViewStack:
    """Per-view cascade: mappings f_1..f_m and partitions g_1..g_m."""

    mappings: list
    partitions: list

    @property
    def depth(self):
        return len(self.mappings)


def _membership_init(x, k, seed):
    """Soft cluster memberships from k-means on the sample columns, plus a
    small additive offset so every entry can still move.

    Gaussian responsibilities (bandwidth = mean nearest-centroid distance)
    rather than a hard 0/1 indicator: samples near the same group of
    centroids get similar columns, so the geometry that deeper layers
    factorize still reflects sample similarity. Hard indicators are
    mutually equidistant and blind the cascade to which clusters are
    related.
    """
    result = kmeans(x.T, k, seed=seed, max_iter=100, n_init=5)
    points = x.T
    diff = points[:, None, :] - result.centroids[None, :, :]
    d2 = np.einsum("nkd,nkd->nk", diff, diff)
    bandwidth = max(float(d2.min(axis=1).mean()), 1e-12)
    return np.exp(-d2 / (2.0 * bandwidth)).T + INDICATOR_OFFSET


def seminmf(x, k, seed=0, max_iter=200, tol=1e-5):
    """Alternate exact f-solves with multiplicative g-updates.

    Stops when the relative change of the squared reconstruction error
    falls below `tol` or after `max_iter` alternations.
    """
    x = linalg.check_matrix(x, "x")
    n = x.shape[1]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise DimensionError(f"need n >= k, got n={n}, k={k}")

    g = _membership_init(x, k, seed)
    history = []
    f = None
    prev = None
    it = 0
    for it in range(1, max_iter + 1):
        f = x @ linalg.pinv(g)
        cross = f.T @ x
        gram = f.T @ f
        gram_pos = linalg.pos_part(gram) @ g
        gram_neg = linalg.neg_part(gram) @ g
        g = backend.mu_update(g, cross, gram_pos, gram_neg, DENOM_FLOOR)
        obj = linalg.frob_sq(x - f @ g)
        history.append(obj)
        if prev is not None and abs(prev - obj) <= tol * max(prev, 1e-12):
            break
        prev = obj
    return SemiNmfResult(f=f, g=g, objective_history=history, n_iter=it)


def pretrain_stack(x, layer_dims, seed=0, max_iter=200, tol=1e-5):
    """Cascaded semi-NMF warm start for one view.

    Layer 1 factorizes x; each deeper layer factorizes the previous
    partition. `layer_dims` must be non-increasing and every width must
    fit the sample count.
    """
    x = linalg.check_matrix(x, "x")
    dims = [int(d) for d in layer_dims]
    if not dims:
        raise ValueError("layer_dims must be non-empty")
    if any(d < 1 for d in dims):
        raise ValueError(f"layer widths must be >= 1, got {dims}")
    if any(a < b for a, b in zip(dims, dims[1:])):
        raise DimensionError(f"layer_dims must be non-increasing, got {dims}")
    if x.shape[1] < dims[0]:
        raise DimensionError(
            f"first layer width {dims[0]} exceeds sample count {x.shape[1]}"
        )

    seeds = as_seed_sequence(seed).spawn(len(dims))
    mappings = []
    partitions = []
    target = x
    for dim, child in zip(dims, seeds):
        result = seminmf(target, dim, seed=child, max_iter=max_iter, tol=tol)
        mappings.append(result.f)
        partitions.append(result.g)
        target = result.g
    return ViewStack(mappings=mappings, partitions=partitions)
