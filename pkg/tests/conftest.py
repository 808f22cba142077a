import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dmfaw import core, dataio  # noqa: E402


@pytest.fixture(scope="session")
def blob_dataset_dir(tmp_path_factory):
    """The synthetic dataset used by the end-to-end checks, written to disk
    exactly the way the `synth` subcommand does."""
    out = tmp_path_factory.mktemp("blobs")
    dataset = dataio.synth_blobs(
        views=3, n=300, k=3, dims=[20, 20, 20],
        noise_sigma=0.5, irrelevant_frac=0.3, seed=1,
    )
    dataio.save_dataset(dataset, out)
    return out


@pytest.fixture(scope="session")
def blob_dataset(blob_dataset_dir):
    return dataio.load(blob_dataset_dir / "manifest.json")


@pytest.fixture(scope="session")
def blob_fit(blob_dataset):
    """Library-level fit with the same configuration the reference CLI run
    uses (lambda 16, layers 30,15,k, seed 1, defaults otherwise)."""
    config = core.DmfawConfig(layer_dims=(30, 15, 3), lam=16.0, seed=1)
    return core.fit(blob_dataset, config)
