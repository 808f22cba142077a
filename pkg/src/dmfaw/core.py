"""Alternating optimizer for weighted deep matrix factorization with
late-fusion consensus.

One outer iteration updates, in order: the consensus partition (trace
maximization over row-orthonormal matrices), then per view the feature
weights, the mapping/partition cascade (exact pseudo-inverse solves and
multiplicative ratio updates), and the view-to-consensus permutation,
then the view coefficients. The feature-weight exponent p is adapted once
per iteration by an error-ratio controller.
"""

import math
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np
from scipy.special import logsumexp

from . import backend, linalg
from .exceptions import DimensionError, FitError
from .kmeans import as_seed_sequence
from .seminmf import ViewStack, pretrain_stack

DENOM_FLOOR = 1e-12
RESIDUAL_FLOOR = 1e-12
P_SINGULARITY_EPS = 1e-3


def _p_near_singularity(p):
    # open band around 1 with a sliver of float slack: the default lower
    # bound 1.001 rounds to just under 1 + 1e-3 and must stay valid
    return abs(p - 1.0) < P_SINGULARITY_EPS * (1.0 - 1e-9)


@dataclass
class DmfawConfig:
    """Hyperparameters of one fit.

    layer_dims is the full cascade [k_1, ..., k_{m-1}, k]; the last width
    must equal the dataset's cluster count. `adaptive_p` switches the
    controller on (the "dynamic" arm); with it off, p stays at `p_init`.
    `weighted_mapping` applies the feature weights inside the mapping
    solve as well (off by default: the plain pseudo-inverse solve).
    `allow_p_below_one` permits a controller range inside (0, 1), which
    flips the weighting from residual-proportional to residual-inverse.
    """

    layer_dims: tuple
    lam: float = 1.0
    n1: float = 1.0
    n2: float = 0.2
    p_init: float = 2.0
    p_bounds: tuple = (2.0, 10.0)
    tol_init: float = 1e-3
    max_outer_iter: int = 100
    conv_rel_tol: float = 1e-5
    seed: int = 0
    adaptive_p: bool = True
    weighted_mapping: bool = False
    allow_p_below_one: bool = False
    pretrain_max_iter: int = 200
    pretrain_tol: float = 1e-5

    def validate(self, k=None):
        dims = tuple(int(d) for d in self.layer_dims)
        if not dims:
            raise ValueError("layer_dims must be non-empty")
        if any(d < 1 for d in dims):
            raise ValueError(f"layer widths must be >= 1, got {dims}")
        if any(a <= b for a, b in zip(dims, dims[1:])):
            raise ValueError(f"layer_dims must be strictly decreasing, got {dims}")
        if k is not None and dims[-1] != k:
            raise ValueError(
                f"last layer width {dims[-1]} must equal the cluster count {k}"
            )
        if not self.lam > 0:
            raise ValueError("lam must be > 0")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("n1 and n2 must be >= 0")
        if not self.tol_init > 0:
            raise ValueError("tol_init must be > 0")
        p_min, p_max = self.p_bounds
        if not (0 < p_min <= self.p_init <= p_max):
            raise ValueError(
                f"need 0 < p_min <= p_init <= p_max, got "
                f"({p_min}, {self.p_init}, {p_max})"
            )
        if self.allow_p_below_one:
            if _p_near_singularity(p_max) or p_max >= 1.0:
                raise ValueError(
                    "with allow_p_below_one the whole p range must sit below "
                    f"1 - {P_SINGULARITY_EPS}"
                )
        elif _p_near_singularity(p_min) or p_min <= 1.0:
            # default regime: the controller range stays above the p = 1
            # singularity of the weight formula
            raise ValueError(f"p_min must stay at least {P_SINGULARITY_EPS} above 1")
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be >= 1")
        if self.conv_rel_tol < 0:
            raise ValueError("conv_rel_tol must be >= 0")
        return self


@dataclass
class PiController:
    """Error-ratio controller for the feature-selection exponent p.

    On each step after the first, p is scaled by (tol/|loss|)^n1 times
    (|prev|/|loss|)^n2 and clamped into [p_min, p_max]; the tolerance then
    grows by the relative loss change. The first step only records the
    loss.
    """

    p: float
    tol: float
    n1: float = 1.0
    n2: float = 0.2
    p_min: float = 1.001
    p_max: float = 10.0
    prev_loss: float = None

    def step(self, closs):
        if not math.isfinite(closs):
            raise FitError(f"controller received non-finite loss {closs!r}")
        if self.prev_loss is None:
            self.prev_loss = float(closs)
            return self
        c = max(abs(closs), 1e-12)
        prev = max(abs(self.prev_loss), 1e-12)
        p_new = self.p * (self.tol / c) ** self.n1 * (prev / c) ** self.n2
        if not math.isfinite(p_new):
            p_new = self.p_max if p_new > 0 else self.p_min
        self.p = min(max(p_new, self.p_min), self.p_max)
        self.tol = self.tol * (1.0 + abs(closs - self.prev_loss) / prev)
        self.prev_loss = float(closs)
        return self


@dataclass
class FusionState:
    """Consensus-side state: G*, per-view permutations, coefficients, and
    the fixed average-partition anchor."""

    consensus: np.ndarray        # (k, n), rows orthonormal
    permutations: list           # V matrices (k, k), orthogonal
    coeffs: np.ndarray           # (V,), >= 0, unit l2 norm
    avg_region: np.ndarray       # (n, n), symmetric PSD, frozen after pretraining


@dataclass
class FitTrace:
    """Per-outer-iteration scalars recorded during a fit."""

    iteration: list = field(default_factory=list)
    total: list = field(default_factory=list)
    recon: list = field(default_factory=list)
    align: list = field(default_factory=list)
    p: list = field(default_factory=list)
    tol: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    # constraint residuals, evaluated at the end of each iteration
    gstar_orth: list = field(default_factory=list)
    perm_orth_max: list = field(default_factory=list)
    weight_sum_err_max: list = field(default_factory=list)
    beta_norm_err: list = field(default_factory=list)
    beta_min: list = field(default_factory=list)
    partition_min: list = field(default_factory=list)
    # per-view KKT residuals of the last-layer update, one row per iteration
    kkt: list = field(default_factory=list)
    # alignment-term gains of the two exact argmax updates
    consensus_align_gain: list = field(default_factory=list)
    perm_align_gain_min: list = field(default_factory=list)

    def __len__(self):
        return len(self.iteration)

    def csv_rows(self):
        """Rows for the public trace file: iter,total,recon,align,p,tol,seconds."""
        return list(
            zip(
                self.iteration,
                self.total,
                self.recon,
                self.align,
                self.p,
                self.tol,
                self.seconds,
            )
        )


@dataclass
class FitResult:
    fusion: FusionState
    stacks: list              # V ViewStacks
    weights: list             # V vectors of per-feature weights
    trace: FitTrace
    converged: bool
    controller: PiController


def _chain(mats):
    """Product of a mapping cascade, folded small-side first."""
    out = mats[-1]
    for mat in reversed(mats[:-1]):
        out = mat @ out
    return out


def canonicalize_layer(stack, layer):
    """Fix the scale split of one layer: unit-norm mapping columns, with
    the scale absorbed into the partition rows (the product is unchanged).

    The factorization is invariant to (F / c, c G) rescalings while the
    consensus-alignment reward grows linearly with the partition scale, so
    without a canonical split the exact mapping solve lets the partition
    scale run away. Zero columns are left untouched.
    """
    f = stack.mappings[layer]
    norms = np.linalg.norm(f, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    stack.mappings[layer] = f / safe
    stack.partitions[layer] = safe[:, None] * stack.partitions[layer]


def normalize_partition_rows(stack):
    """Unit-norm rows for the last partition, scale absorbed into the last
    mapping's columns (the product is unchanged).

    The alignment reward is linear in the last partition while the
    reconstruction is invariant to its scale split, so the rows are kept
    on the unit sphere; this is the convention that keeps the fused
    objective bounded. Zero rows are left untouched.
    """
    g = stack.partitions[-1]
    norms = np.linalg.norm(g, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    stack.partitions[-1] = g / safe[:, None]
    stack.mappings[-1] = stack.mappings[-1] * safe[None, :]


def _prefix(mappings, count):
    """Product of the first `count` mappings, None meaning identity."""
    if count == 0:
        return None
    return _chain(mappings[:count])


def reconstruction(x, stack):
    """x minus the full cascade reconstruction for one view."""
    return x - _chain(stack.mappings) @ stack.partitions[-1]


def objective(views, stacks, weights, fusion, lam):
    """Evaluate the fused objective.

    Returns (total, recon, align) where recon sums the weighted squared
    reconstruction errors, align is lam times the consensus-alignment
    trace, and total = recon - align.
    """
    recon = 0.0
    for x, stack, w in zip(views, stacks, weights):
        recon += linalg.weighted_resid_sq(w, reconstruction(x, stack))
    align = lam * _alignment_trace(fusion, stacks)
    return recon - align, recon, align


def _fused_local(fusion, stacks):
    """sum_v beta_v * G_m^(v)'T M^(v), the (n, k) fused local partition."""
    acc = None
    for beta, stack, perm in zip(fusion.coeffs, stacks, fusion.permutations):
        term = beta * (stack.partitions[-1].T @ perm)
        acc = term if acc is None else acc + term
    return acc


def _alignment_trace(fusion, stacks):
    u = fusion.avg_region @ _fused_local(fusion, stacks)
    return float(np.einsum("ij,ji->", fusion.consensus, u))


def _view_align_trace(fusion, stack, v):
    """Alignment contribution tr(M K) of one view, K = G* A G_m^T."""
    key = fusion.consensus @ fusion.avg_region @ stack.partitions[-1].T
    return float(
        fusion.coeffs[v] * np.einsum("ij,ji->", fusion.permutations[v], key)
    )


def update_consensus(fusion, stacks):
    """Row-orthonormal consensus maximizing the alignment trace."""
    u = fusion.avg_region @ _fused_local(fusion, stacks)
    return linalg.max_trace_orthogonal(u)


def update_mapping(x, stack, layer, weights=None):
    """Exact mapping solve at `layer` (0-based): pinv(Z) @ x @ pinv(G).

    With `weights` given, the weighted variant pinv(W Z) @ W x @ pinv(G)
    is used instead.
    """
    z = _prefix(stack.mappings, layer)
    g = stack.partitions[layer]
    if weights is None:
        left = x if z is None else linalg.pinv(z) @ x
    else:
        w = weights[:, None]
        if z is None:
            # pinv(diag(w)) @ (w * x): rows with zero weight drop out
            left = np.where(w > 0, x, 0.0)
        else:
            left = linalg.pinv(w * z) @ (w * x)
    return left @ linalg.pinv(g)


def _weighted_products(x, stack, w, layer):
    """cross = Z'W x and the signed Gram products (Z'W Z)^± @ G.

    The signed-part split is applied to the weighted Gram matrix itself and
    the non-negative partition multiplied outside: this is the form with
    the descent guarantee, and its denominator keeps a term proportional
    to each partition entry, which bounds the update ratio.
    """
    z = _prefix(stack.mappings, layer + 1)
    zw = w[:, None] * z
    cross = zw.T @ x
    gram = zw.T @ z
    g = stack.partitions[layer]
    gram_pos = linalg.pos_part(gram) @ g
    gram_neg = linalg.neg_part(gram) @ g
    return cross, gram_pos, gram_neg


def update_partition_mid(x, stack, w, layer):
    """Multiplicative update of an intermediate partition (layer < m-1)."""
    cross, gram_pos, gram_neg = _weighted_products(x, stack, w, layer)
    return backend.mu_update(
        stack.partitions[layer], cross, gram_pos, gram_neg, DENOM_FLOOR
    )


def update_partition_last(x, stack, w, fusion, v, lam):
    """Multiplicative update of the last partition, pulled toward the
    consensus through the anchored term lam * beta_v * M G* A."""
    last = stack.depth - 1
    cross, gram_pos, gram_neg = _weighted_products(x, stack, w, last)
    anchor = fusion.permutations[v] @ fusion.consensus @ fusion.avg_region
    scale = lam * float(fusion.coeffs[v])
    return backend.mu_update_anchored(
        stack.partitions[last], cross, gram_pos, gram_neg, anchor, scale, DENOM_FLOOR
    )


def update_weights(x, stack, p):
    """Closed-form feature weights from per-feature squared residuals.

    W_i is proportional to u_i^(1/(p-1)) and normalized so sum_i W_i^p = 1.
    Evaluated in log space: the formula is scale-invariant in u, and for p
    near its lower bound the exponent 1/(p-1) is large enough to overflow
    a direct power.
    """
    p = float(p)
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if _p_near_singularity(p):
        raise ValueError(f"p = {p} is within {P_SINGULARITY_EPS} of the singularity at 1")
    u = np.maximum(backend.row_sq_sums(reconstruction(x, stack)), RESIDUAL_FLOOR)
    logu = np.log(u)
    e1 = 1.0 / (p - 1.0)
    logw = e1 * logu - logsumexp(p * e1 * logu) / p
    return np.exp(logw)


def update_permutation(fusion, stack, v):
    """Orthogonal view-to-consensus alignment maximizing tr(M G* A G_m^T)."""
    key = float(fusion.coeffs[v]) * (
        fusion.consensus @ fusion.avg_region @ stack.partitions[-1].T
    )
    return linalg.max_trace_orthogonal(key)


def update_coeffs(fusion, stacks):
    """Closed-form view coefficients: clamped alignment traces, l2-normalized.

    If no view aligns positively the coefficients fall back to uniform.
    """
    omega = np.empty(len(stacks))
    for v, stack in enumerate(stacks):
        key = fusion.permutations[v] @ fusion.consensus @ fusion.avg_region
        omega[v] = np.einsum("ij,ij->", stack.partitions[-1], key)
    omega = np.maximum(omega, 0.0)
    norm = np.linalg.norm(omega)
    if norm == 0.0:
        return np.full(len(stacks), 1.0 / math.sqrt(len(stacks)))
    return omega / norm


def build_avg_region(stacks):
    """Average-partition anchor: mean over views of Ghat^T Ghat with
    row-normalized last partitions. Built once after pretraining and then
    held fixed so the consensus stays near the pre-fusion average."""
    acc = None
    for stack in stacks:
        g = stack.partitions[-1]
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        ghat = g / np.where(norms > 0, norms, 1.0)
        gram = ghat.T @ ghat
        acc = gram if acc is None else acc + gram
    avg = acc / len(stacks)
    return 0.5 * (avg + avg.T)


def kkt_residual(x, stack, w, fusion, v, lam):
    """Frobenius norm of the complementary-slackness product of the
    last-layer subproblem; approaches 0 at a fixed point."""
    z = _chain(stack.mappings)
    g = stack.partitions[-1]
    zw = w[:, None] * z
    grad = 2.0 * (zw.T @ (z @ g - x)) - lam * float(fusion.coeffs[v]) * (
        fusion.permutations[v] @ fusion.consensus @ fusion.avg_region
    )
    return float(np.linalg.norm(grad * g))


def _constraint_snapshot(fusion, stacks, weights, p, trace):
    k = fusion.consensus.shape[0]
    eye = np.eye(k)
    trace.gstar_orth.append(
        float(np.linalg.norm(fusion.consensus @ fusion.consensus.T - eye))
    )
    trace.perm_orth_max.append(
        max(float(np.linalg.norm(m @ m.T - eye)) for m in fusion.permutations)
    )
    trace.weight_sum_err_max.append(
        max(abs(float(np.sum(w**p)) - 1.0) for w in weights)
    )
    trace.beta_norm_err.append(abs(float(np.linalg.norm(fusion.coeffs)) - 1.0))
    trace.beta_min.append(float(fusion.coeffs.min()))
    trace.partition_min.append(
        min(float(g.min()) for stack in stacks for g in stack.partitions)
    )


def fit(dataset, config):
    """Run the full alternating optimization on a multi-view dataset.

    Pretrains every view with cascaded semi-NMF, freezes the average
    partition anchor, then alternates the closed-form and multiplicative
    updates until the relative objective change drops below
    `config.conv_rel_tol` or `config.max_outer_iter` is reached.
    """
    config.validate(dataset.k)
    views = [linalg.check_matrix(v, f"view {i}") for i, v in enumerate(dataset.views)]
    n = views[0].shape[1]
    if any(v.shape[1] != n for v in views):
        raise DimensionError("all views must share the same sample count")
    dims = tuple(int(d) for d in config.layer_dims)
    k = dims[-1]
    n_views = len(views)
    depth = len(dims)

    pre_seeds = as_seed_sequence(config.seed).spawn(n_views)
    stacks = [
        pretrain_stack(
            x,
            dims,
            seed=child,
            max_iter=config.pretrain_max_iter,
            tol=config.pretrain_tol,
        )
        for x, child in zip(views, pre_seeds)
    ]
    for stack in stacks:
        normalize_partition_rows(stack)

    fusion = FusionState(
        consensus=np.zeros((k, n)),
        permutations=[np.eye(k) for _ in range(n_views)],
        coeffs=np.full(n_views, 1.0 / math.sqrt(n_views)),
        avg_region=build_avg_region(stacks),
    )
    fusion.consensus = update_consensus(fusion, stacks)
    weights = [
        np.full(x.shape[0], (1.0 / x.shape[0]) ** (1.0 / config.p_init))
        for x in views
    ]
    ctrl = PiController(
        p=config.p_init,
        tol=config.tol_init,
        n1=config.n1,
        n2=config.n2,
        p_min=config.p_bounds[0],
        p_max=config.p_bounds[1],
    )

    trace = FitTrace()
    converged = False
    prev_total = None
    start = perf_counter()
    for it in range(1, config.max_outer_iter + 1):
        p_used, tol_used = ctrl.p, ctrl.tol

        align_before = _alignment_trace(fusion, stacks)
        fusion.consensus = update_consensus(fusion, stacks)
        trace.consensus_align_gain.append(
            config.lam * (_alignment_trace(fusion, stacks) - align_before)
        )

        perm_gain_min = math.inf
        for v in range(n_views):
            x, stack = views[v], stacks[v]
            weights[v] = update_weights(x, stack, p_used)
            mapping_w = weights[v] if config.weighted_mapping else None
            for layer in range(depth - 1):
                stack.mappings[layer] = update_mapping(x, stack, layer, mapping_w)
                canonicalize_layer(stack, layer)
                stack.partitions[layer] = update_partition_mid(
                    x, stack, weights[v], layer
                )
            stack.mappings[depth - 1] = update_mapping(x, stack, depth - 1, mapping_w)
            stack.partitions[depth - 1] = update_partition_last(
                x, stack, weights[v], fusion, v, config.lam
            )
            normalize_partition_rows(stack)
            before = _view_align_trace(fusion, stack, v)
            fusion.permutations[v] = update_permutation(fusion, stack, v)
            gain = config.lam * (_view_align_trace(fusion, stack, v) - before)
            perm_gain_min = min(perm_gain_min, gain)
        trace.perm_align_gain_min.append(perm_gain_min)

        fusion.coeffs = update_coeffs(fusion, stacks)

        total, recon, align = objective(views, stacks, weights, fusion, config.lam)
        if not math.isfinite(total):
            raise FitError(f"non-finite objective at outer iteration {it}")

        trace.iteration.append(it)
        trace.total.append(total)
        trace.recon.append(recon)
        trace.align.append(align)
        trace.p.append(p_used)
        trace.tol.append(tol_used)
        trace.seconds.append(perf_counter() - start)
        _constraint_snapshot(fusion, stacks, weights, p_used, trace)
        trace.kkt.append(
            [
                kkt_residual(views[v], stacks[v], weights[v], fusion, v, config.lam)
                for v in range(n_views)
            ]
        )

        if config.adaptive_p:
            ctrl.step(abs(total))

        if prev_total is not None and abs(total - prev_total) < (
            config.conv_rel_tol * max(abs(prev_total), 1e-12)
        ):
            converged = True
            break
        prev_total = total

    return FitResult(
        fusion=fusion,
        stacks=stacks,
        weights=weights,
        trace=trace,
        converged=converged,
        controller=ctrl,
    )
