import json

import numpy as np
import pytest

from dmfaw import dataio, metrics
from dmfaw.exceptions import DataError
from dmfaw.kmeans import kmeans


def write_csv(path, rows):
    path.write_text("\n".join(",".join(f"{x:.17g}" for x in row) for row in rows) + "\n")


def make_manifest(tmp_path, views, labels=None, clusters=2, normalization="none"):
    entries = []
    for i, rows in enumerate(views):
        name = f"v{i}.csv"
        write_csv(tmp_path / name, rows)
        entries.append({"path": name})
    labels_path = None
    if labels is not None:
        labels_path = "labels.txt"
        (tmp_path / labels_path).write_text("\n".join(str(x) for x in labels) + "\n")
    manifest = {
        "name": "toy",
        "clusters": clusters,
        "normalization": normalization,
        "views": entries,
        "labels_path": labels_path,
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


class TestLoad:
    def test_two_views(self, tmp_path):
        rows = [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
        path = make_manifest(tmp_path, [rows, rows])
        ds = dataio.load(path)
        assert ds.n_views == 2
        assert ds.n_samples == 3
        assert ds.views[0].shape == (2, 3)

    def test_sample_count_mismatch_names_both_files(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0], [2.0]], [[1.0], [2.0], [3.0]]])
        with pytest.raises(DataError) as err:
            dataio.load(path)
        assert "v0.csv" in str(err.value) and "v1.csv" in str(err.value)

    def test_ragged_row_reports_line(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0, 2.0]]])
        (tmp_path / "v0.csv").write_text("1,2\n3\n")
        with pytest.raises(DataError) as err:
            dataio.load(path)
        assert "line 2" in str(err.value)

    def test_non_numeric_reports_line(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0, 2.0]]])
        (tmp_path / "v0.csv").write_text("1,2\n3,oops\n")
        with pytest.raises(DataError) as err:
            dataio.load(path)
        assert "line 2" in str(err.value)

    def test_missing_view_file(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0]]])
        (tmp_path / "v0.csv").unlink()
        with pytest.raises(DataError) as err:
            dataio.load(path)
        assert "v0.csv" in str(err.value)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DataError):
            dataio.load(tmp_path / "nope.json")

    def test_label_length_mismatch(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0], [2.0]]], labels=[0])
        with pytest.raises(DataError):
            dataio.load(path)

    def test_label_count_must_match_clusters(self, tmp_path):
        path = make_manifest(
            tmp_path, [[[1.0], [2.0], [3.0]]], labels=[0, 1, 2], clusters=2
        )
        with pytest.raises(DataError):
            dataio.load(path)

    def test_l2_sample_normalization(self, tmp_path):
        rows = [[3.0, 4.0], [0.0, 0.0], [1.0, 1.0]]
        path = make_manifest(tmp_path, [rows], normalization="l2_sample")
        ds = dataio.load(path)
        norms = np.linalg.norm(ds.views[0], axis=0)
        np.testing.assert_allclose(norms[0], 1.0, atol=1e-12)
        np.testing.assert_allclose(norms[2], 1.0, atol=1e-12)
        assert norms[1] == 0.0  # zero columns stay zero

    def test_zscore_normalization(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = rng.standard_normal((10, 3)).tolist()
        path = make_manifest(tmp_path, [rows], normalization="zscore_feature")
        view = dataio.load(path).views[0]
        np.testing.assert_allclose(view.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(view.std(axis=1), 1.0, atol=1e-12)

    def test_minmax_normalization(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = rng.standard_normal((10, 3)).tolist()
        path = make_manifest(tmp_path, [rows], normalization="minmax_feature")
        view = dataio.load(path).views[0]
        np.testing.assert_allclose(view.min(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(view.max(axis=1), 1.0, atol=1e-12)

    def test_unknown_normalization(self, tmp_path):
        path = make_manifest(tmp_path, [[[1.0]]], normalization="bogus")
        with pytest.raises(DataError):
            dataio.load(path)


class TestSynthBlobs:
    def test_point_masses_cluster_perfectly(self):
        ds = dataio.synth_blobs(
            views=2, n=60, k=3, dims=[6, 8], noise_sigma=0.0, irrelevant_frac=0.0, seed=0
        )
        for view in ds.views:
            labels = kmeans(view.T, 3, seed=0).labels
            assert metrics.accuracy(labels, ds.labels) == 1.0

    def test_noise_feature_count_exact(self):
        ds = dataio.synth_blobs(
            views=1, n=40, k=2, dims=[9], noise_sigma=0.5, irrelevant_frac=0.5, seed=3
        )
        view = ds.views[0]
        assert view.shape[0] == 9
        # noise rows carry no center offset, so their between-cluster mean
        # gap is tiny compared to the >= 5-unit separation of signal rows
        gaps = np.abs(
            view[:, ds.labels == 0].mean(axis=1) - view[:, ds.labels == 1].mean(axis=1)
        )
        assert int((gaps < 1.0).sum()) == 4  # floor(9 * 0.5)

    def test_determinism(self):
        kwargs = dict(
            views=2, n=50, k=2, dims=[5, 7],
            noise_sigma=0.3, irrelevant_frac=0.25, seed=9,
        )
        a = dataio.synth_blobs(**kwargs)
        b = dataio.synth_blobs(**kwargs)
        for va, vb in zip(a.views, b.views):
            np.testing.assert_array_equal(va, vb)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_separation_scales_with_sigma(self):
        ds = dataio.synth_blobs(
            views=1, n=40, k=2, dims=[10], noise_sigma=2.0, irrelevant_frac=0.0, seed=4
        )
        centers = [ds.views[0][:, ds.labels == c].mean(axis=1) for c in (0, 1)]
        assert np.linalg.norm(centers[0] - centers[1]) >= 10 * 2.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            dataio.synth_blobs(views=1, n=3, k=2, dims=[4])
        with pytest.raises(ValueError):
            dataio.synth_blobs(views=1, n=10, k=2, dims=[4], irrelevant_frac=1.0)
        with pytest.raises(ValueError):
            dataio.synth_blobs(views=2, n=10, k=2, dims=[4])


class TestRoundTrip:
    def test_save_load_exact(self, tmp_path):
        ds = dataio.synth_blobs(
            views=2, n=30, k=2, dims=[4, 5], noise_sigma=0.7, irrelevant_frac=0.2, seed=5
        )
        manifest = dataio.save_dataset(ds, tmp_path, normalization="none")
        back = dataio.load(manifest)
        for original, loaded in zip(ds.views, back.views):
            np.testing.assert_array_equal(original, loaded)
        np.testing.assert_array_equal(ds.labels, back.labels)
