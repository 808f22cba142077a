"""Multi-view clustering via weighted deep semi-NMF with adaptive feature
weights and late-fusion consensus."""

from .backend import BACKEND
from .core import DmfawConfig, FitResult, FitTrace, FusionState, PiController, fit
from .dataio import MultiViewDataset, load, save_dataset, synth_blobs
from .kmeans import KmeansResult, kmeans
from .metrics import accuracy, nmi, pairwise_similarity, purity
from .seminmf import ViewStack, pretrain_stack, seminmf

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DmfawConfig",
    "FitResult",
    "FitTrace",
    "FusionState",
    "KmeansResult",
    "MultiViewDataset",
    "PiController",
    "ViewStack",
    "accuracy",
    "fit",
    "kmeans",
    "load",
    "nmi",
    "pairwise_similarity",
    "pretrain_stack",
    "purity",
    "save_dataset",
    "seminmf",
    "synth_blobs",
]
