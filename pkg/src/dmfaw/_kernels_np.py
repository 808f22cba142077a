"""Numpy implementations of the elementwise hot kernels.

These are the reference semantics; `dmfaw._kernels` (Cython) computes the
same quantities in a single fused pass. Inputs are assumed to be float64,
C-contiguous, and shape-checked by `dmfaw.backend`. `gram_pos`/`gram_neg`
are the already-multiplied signed Gram products pos(B) @ g and neg(B) @ g,
so they are entrywise non-negative.
"""

import numpy as np


def mu_update(g, cross, gram_pos, gram_neg, floor):
    # g * sqrt((cross^+ + neg(B) g) / (cross^- + pos(B) g)), denominator floored
    num = 0.5 * (np.abs(cross) + cross) + gram_neg
    den = 0.5 * (np.abs(cross) - cross) + gram_pos
    return g * np.sqrt(num / np.maximum(den, floor))


def mu_update_anchored(g, cross, gram_pos, gram_neg, anchor, scale, floor):
    num = (
        0.5 * (np.abs(cross) + cross)
        + gram_neg
        + scale * 0.5 * (np.abs(anchor) + anchor)
    )
    den = (
        0.5 * (np.abs(cross) - cross)
        + gram_pos
        + scale * 0.5 * (np.abs(anchor) - anchor)
    )
    return g * np.sqrt(num / np.maximum(den, floor))


def row_sq_sums(a):
    return np.einsum("ij,ij->i", a, a)


def weighted_sq_norm(w, a):
    return float(np.dot(w * w, np.einsum("ij,ij->i", a, a)))
