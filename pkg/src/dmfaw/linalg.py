"""Dense real-matrix primitives used by the optimizer.

Everything here operates on plain float64 ndarrays. The factorizations are
delegated to LAPACK through numpy; the contracts (orthonormality residuals,
Penrose identities, trace optimality) are what the rest of the package and
the test suite rely on.
"""

from dataclasses import dataclass

import numpy as np

from .backend import weighted_sq_norm
from .exceptions import DimensionError


def check_matrix(a, name="matrix"):
    """Coerce to a finite float64 2-D array or raise."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


@dataclass
class EconSvd:
    """Economic SVD `a = left @ diag(singulars) @ right.T`.

    left : (n, k) with orthonormal columns
    singulars : (k,) non-negative, non-increasing
    right : (k, k) orthogonal
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def econ_svd(a):
    """Economic SVD of an n x k matrix with n >= k.

    Rank-deficient inputs are fine (zero singular values allowed). Callers
    with wide matrices must transpose first.
    """
    a = check_matrix(a, "a")
    n, k = a.shape
    if n < k:
        raise DimensionError(f"econ_svd needs n >= k, got {n} x {k}")
    left, singulars, right_t = np.linalg.svd(a, full_matrices=False)
    return EconSvd(left=left, singulars=singulars, right=right_t.T)


def pinv(a):
    """Moore-Penrose pseudo-inverse.

    Singular values below `max(rows, cols) * eps * sigma_max` are treated
    as zero.
    """
    a = check_matrix(a, "a")
    rcond = max(a.shape) * np.finfo(np.float64).eps
    return np.linalg.pinv(a, rcond=rcond)


def pos_part(a):
    """Elementwise (|a| + a) / 2."""
    a = check_matrix(a, "a")
    return 0.5 * (np.abs(a) + a)


def neg_part(a):
    """Elementwise (|a| - a) / 2, so that pos_part(a) - neg_part(a) == a."""
    a = check_matrix(a, "a")
    return 0.5 * (np.abs(a) - a)


def max_trace_orthogonal(u):
    """Row-orthonormal G (k x n) maximizing trace(G @ u) for u of shape n x k.

    With u = S @ diag(d) @ V.T the maximizer is G = V @ S.T, and the attained
    trace equals the sum of the singular values of u.
    """
    u = check_matrix(u, "u")
    n, k = u.shape
    if n < k:
        raise DimensionError(f"max_trace_orthogonal needs n >= k, got {n} x {k}")
    svd = econ_svd(u)
    return svd.right @ svd.left.T


def frob_sq(a):
    """Squared Frobenius norm."""
    a = check_matrix(a, "a")
    flat = a.ravel()
    return float(np.dot(flat, flat))


def weighted_resid_sq(w, a):
    """sum_ij (w_i * a_ij)^2, i.e. ||diag(w) @ a||_F^2 for row weights w >= 0."""
    a = check_matrix(a, "a")
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != a.shape[0]:
        raise DimensionError(f"w has shape {w.shape}, expected ({a.shape[0]},)")
    if not np.isfinite(w).all():
        raise ValueError("w contains NaN or Inf entries")
    if np.any(w < 0):
        raise ValueError("w must be non-negative")
    return weighted_sq_norm(w, a)
