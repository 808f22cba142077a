"""Multi-view dataset ingestion, normalization, and synthetic generation.

On disk a dataset is a JSON manifest plus one delimited text file per view
(rows = samples) and an optional integer label file. In memory each view is
stored features-by-samples (d_v x n), which is the orientation the
factorization works in.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

NORMALIZATIONS = ("none", "l2_sample", "zscore_feature", "minmax_feature")


@dataclass
class MultiViewDataset:
    name: str
    views: list          # V arrays of shape (d_v, n)
    labels: np.ndarray | None   # (n,) ints, optional
    k: int               # declared cluster count

    @property
    def n_samples(self):
        return self.views[0].shape[1]

    @property
    def n_views(self):
        return len(self.views)


def normalize(view, mode):
    """Apply one of the supported normalizations to a (d, n) view."""
    if mode == "none":
        return view
    if mode == "l2_sample":
        norms = np.linalg.norm(view, axis=0)
        return view / np.where(norms > 0, norms, 1.0)
    if mode == "zscore_feature":
        mean = view.mean(axis=1, keepdims=True)
        std = view.std(axis=1, keepdims=True)
        return (view - mean) / np.where(std > 0, std, 1.0)
    if mode == "minmax_feature":
        lo = view.min(axis=1, keepdims=True)
        span = view.max(axis=1, keepdims=True) - lo
        return (view - lo) / np.where(span > 0, span, 1.0)
    raise DataError(f"unknown normalization {mode!r}; expected one of {NORMALIZATIONS}")


def _read_matrix(path, delimiter=",", has_header=False):
    """Parse a delimited text file into an (n_samples, d) array.

    Malformed content is reported with the file and 1-based line number.
    """
    rows = []
    width = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read view file {path}: {exc}") from exc
    start = 1 if has_header else 0
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        cells = line.split(delimiter)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(
                f"{path}, line {lineno}: expected {width} columns, found {len(cells)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataError(f"{path}, line {lineno}: non-numeric cell ({exc})") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def read_labels(path):
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read label file {path}: {exc}") from exc
    labels = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            labels.append(int(line.strip()))
        except ValueError as exc:
            raise DataError(f"{path}, line {lineno}: non-integer label") from exc
    if not labels:
        raise DataError(f"{path}: no labels")
    return np.asarray(labels, dtype=np.int64)


def load(manifest_path):
    """Load a dataset described by a JSON manifest.

    Relative view/label paths resolve against the manifest's directory.
    View files hold one sample per row; views are transposed to (d_v, n)
    and normalized per the manifest before being returned.
    """
    manifest_path = Path(manifest_path)
    try:
        spec = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from exc

    for key in ("name", "clusters", "views"):
        if key not in spec:
            raise DataError(f"{manifest_path}: missing manifest key {key!r}")
    k = int(spec["clusters"])
    if k < 2:
        raise DataError(f"{manifest_path}: clusters must be >= 2, got {k}")
    mode = spec.get("normalization", "none")
    if mode not in NORMALIZATIONS:
        raise DataError(
            f"{manifest_path}: unknown normalization {mode!r}; "
            f"expected one of {NORMALIZATIONS}"
        )
    entries = spec["views"]
    if not isinstance(entries, list) or not entries:
        raise DataError(f"{manifest_path}: 'views' must be a non-empty list")

    base = manifest_path.parent
    views = []
    paths = []
    for entry in entries:
        if "path" not in entry:
            raise DataError(f"{manifest_path}: view entry without 'path'")
        path = base / entry["path"]
        raw = _read_matrix(
            path,
            delimiter=entry.get("delimiter", ","),
            has_header=bool(entry.get("has_header", False)),
        )
        paths.append(str(path))
        views.append(raw.T.copy())

    n = views[0].shape[1]
    for path, view in zip(paths[1:], views[1:]):
        if view.shape[1] != n:
            raise DataError(
                f"sample-count mismatch: {paths[0]} has {n} samples "
                f"but {path} has {view.shape[1]}"
            )

    labels = None
    if spec.get("labels_path"):
        labels = read_labels(base / spec["labels_path"])
        if labels.shape[0] != n:
            raise DataError(
                f"label count {labels.shape[0]} does not match sample count {n}"
            )
        distinct = np.unique(labels).size
        if distinct != k:
            raise DataError(
                f"manifest declares {k} clusters but labels contain "
                f"{distinct} distinct values"
            )

    views = [normalize(v, mode) for v in views]
    return MultiViewDataset(name=str(spec["name"]), views=views, labels=labels, k=k)


def synth_blobs(views, n, k, dims, noise_sigma=0.5, irrelevant_frac=0.0, seed=0):
    """Synthetic multi-view Gaussian blobs with optional pure-noise features.

    Per view, cluster centers sit on mutually orthogonal directions scaled
    so pairwise separation is at least 10 * noise_sigma, and
    floor(d_v * irrelevant_frac) feature rows are replaced by standard
    normal noise carrying no cluster signal. Ground-truth labels are
    attached; output is deterministic per seed.
    """
    if views < 1:
        raise ValueError("views must be >= 1")
    if len(dims) != views:
        raise ValueError(f"expected {views} dims, got {len(dims)}")
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < 2 * k:
        raise ValueError(f"need n >= 2k = {2 * k} samples, got {n}")
    if not 0.0 <= irrelevant_frac < 1.0:
        raise ValueError("irrelevant_frac must be in [0, 1)")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = [n // k + (1 if c < n % k else 0) for c in range(k)]
    labels = rng.permutation(np.repeat(np.arange(k), counts))

    scale = max(10.0 * noise_sigma, 1.0)
    mats = []
    for d in dims:
        n_noise = math.floor(d * irrelevant_frac)
        d_inf = d - n_noise
        if d_inf < k:
            raise ValueError(
                f"view with {d} features keeps only {d_inf} informative ones; "
                f"needs at least k={k}"
            )
        # orthonormal center directions keep blobs separated both in
        # Euclidean distance and in angle (so per-sample normalization
        # cannot merge them)
        basis, _ = np.linalg.qr(rng.standard_normal((d_inf, k)))
        centers = scale * basis.T
        data = np.empty((n, d))
        noise_idx = rng.choice(d, size=n_noise, replace=False)
        inf_idx = np.setdiff1d(np.arange(d), noise_idx)
        data[:, inf_idx] = centers[labels] + noise_sigma * rng.standard_normal(
            (n, d_inf)
        )
        if n_noise:
            data[:, noise_idx] = rng.standard_normal((n, n_noise))
        mats.append(data.T.copy())

    return MultiViewDataset(name="synth-blobs", views=mats, labels=labels, k=k)


def save_dataset(dataset, out_dir, normalization="l2_sample", delimiter=","):
    """Write view files, labels, and a manifest; returns the manifest path.

    Values are written with 17 significant digits so a load/save round trip
    preserves them exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, view in enumerate(dataset.views):
        name = f"view_{i}.csv"
        rows = view.T
        with open(out / name, "w") as fh:
            for row in rows:
                fh.write(delimiter.join(f"{x:.17g}" for x in row) + "\n")
        entries.append({"path": name, "delimiter": delimiter, "has_header": False})
    labels_path = None
    if dataset.labels is not None:
        labels_path = "labels.txt"
        with open(out / labels_path, "w") as fh:
            fh.write("\n".join(str(int(x)) for x in dataset.labels) + "\n")
    manifest = {
        "name": dataset.name,
        "clusters": int(dataset.k),
        "normalization": normalization,
        "views": entries,
        "labels_path": labels_path,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path
