"""Kernel backend selection.

The multiplicative-update ratio and the squared-residual reductions are the
innermost elementwise operations of the optimizer. A compiled Cython module
(`dmfaw._kernels`) fuses each of them into a single pass; when it is not
available (or ``DMFAW_FORCE_NUMPY=1`` is set) the numpy twins in
`dmfaw._kernels_np` are used instead. `benchmarks/bench_kernels.py` compares
the two.
"""

import os

import numpy as np

from . import _kernels_np
from .exceptions import DimensionError

_FORCE_NUMPY = os.environ.get("DMFAW_FORCE_NUMPY", "") == "1"

if _FORCE_NUMPY:
    _impl = _kernels_np
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np

BACKEND = "cython" if _impl is not _kernels_np else "numpy"


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["numpy"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get_backend(name):
    """Return the raw kernel module for `name` ("cython" or "numpy")."""
    if name == "numpy":
        return _kernels_np
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def _as_c2d(a, name):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    return a


def mu_update(g, cross, gram_pos, gram_neg, floor=1e-12):
    """g * sqrt((cross^+ + gram_neg) / (cross^- + gram_pos)) elementwise.

    `x^+ = (|x| + x)/2` and `x^- = (|x| - x)/2`; `gram_pos`/`gram_neg` are
    the precomputed signed Gram products pos(B) @ g and neg(B) @ g. The
    denominator is floored at `floor` to avoid 0/0.
    """
    g = _as_c2d(g, "g")
    cross = _as_c2d(cross, "cross")
    gram_pos = _as_c2d(gram_pos, "gram_pos")
    gram_neg = _as_c2d(gram_neg, "gram_neg")
    if not (g.shape == cross.shape == gram_pos.shape == gram_neg.shape):
        raise DimensionError(
            f"shape mismatch: g {g.shape}, cross {cross.shape}, "
            f"gram_pos {gram_pos.shape}, gram_neg {gram_neg.shape}"
        )
    return _impl.mu_update(g, cross, gram_pos, gram_neg, float(floor))


def mu_update_anchored(g, cross, gram_pos, gram_neg, anchor, scale, floor=1e-12):
    """`mu_update` with `scale * anchor^±` added to numerator/denominator."""
    g = _as_c2d(g, "g")
    cross = _as_c2d(cross, "cross")
    gram_pos = _as_c2d(gram_pos, "gram_pos")
    gram_neg = _as_c2d(gram_neg, "gram_neg")
    anchor = _as_c2d(anchor, "anchor")
    if not (
        g.shape == cross.shape == gram_pos.shape == gram_neg.shape == anchor.shape
    ):
        raise DimensionError(
            f"shape mismatch: g {g.shape}, cross {cross.shape}, "
            f"gram_pos {gram_pos.shape}, gram_neg {gram_neg.shape}, "
            f"anchor {anchor.shape}"
        )
    return _impl.mu_update_anchored(
        g, cross, gram_pos, gram_neg, anchor, float(scale), float(floor)
    )


def row_sq_sums(a):
    """Per-row sum of squares of a 2-D matrix."""
    return _impl.row_sq_sums(_as_c2d(a, "a"))


def weighted_sq_norm(w, a):
    """sum_ij (w_i * a_ij)^2 for a vector of row weights w."""
    a = _as_c2d(a, "a")
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != a.shape[0]:
        raise DimensionError(f"w has shape {w.shape}, expected ({a.shape[0]},)")
    return _impl.weighted_sq_norm(w, a)
