import importlib

import numpy as np
import pytest

from dmfaw import linalg
from dmfaw.exceptions import DimensionError

seminmf_mod = importlib.import_module("dmfaw.seminmf")
seminmf = seminmf_mod.seminmf
pretrain_stack = seminmf_mod.pretrain_stack


def test_planted_factorization_fits():
    rng = np.random.default_rng(0)
    f0 = rng.standard_normal((8, 3))
    g0 = np.abs(rng.standard_normal((3, 40)))
    x = f0 @ g0
    result = seminmf(x, 3, seed=0, max_iter=3000, tol=1e-13)
    assert result.objective_history[-1] < 1e-6 * linalg.frob_sq(x)


def test_rank_one_positive():
    rng = np.random.default_rng(1)
    x = np.outer(np.abs(rng.standard_normal(5)) + 0.1, np.abs(rng.standard_normal(20)) + 0.1)
    result = seminmf(x, 1, seed=0, max_iter=2000, tol=1e-13)
    assert result.objective_history[-1] < 1e-8 * linalg.frob_sq(x)


def test_partition_stays_nonnegative_with_mixed_input():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((6, 30))
    result = seminmf(x, 4, seed=0)
    assert np.all(result.g >= 0)
    assert np.any(result.f < 0)  # mapping may keep mixed signs


def test_objective_monotone_on_random_instances():
    rng = np.random.default_rng(3)
    for trial in range(10):
        d = rng.integers(3, 10)
        n = rng.integers(10, 30)
        k = rng.integers(1, min(d, n) + 1)
        x = rng.standard_normal((d, n))
        result = seminmf(x, k, seed=trial, max_iter=80, tol=0.0)
        hist = result.objective_history
        for prev, cur in zip(hist, hist[1:]):
            assert cur <= prev + 1e-9 * max(1.0, prev)


def test_seed_determinism():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((5, 25))
    a = seminmf(x, 3, seed=9)
    b = seminmf(x, 3, seed=9)
    np.testing.assert_array_equal(a.g, b.g)
    np.testing.assert_array_equal(a.f, b.f)


def test_needs_enough_samples():
    with pytest.raises(DimensionError):
        seminmf(np.ones((4, 2)), 3)


class TestPretrainStack:
    def test_single_layer_matches_seminmf(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((6, 30))
        stack = pretrain_stack(x, [4], seed=7)
        child = np.random.SeedSequence(7).spawn(1)[0]
        direct = seminmf(x, 4, seed=child)
        np.testing.assert_array_equal(stack.partitions[0], direct.g)
        np.testing.assert_array_equal(stack.mappings[0], direct.f)

    def test_planted_two_layer_reconstruction(self):
        rng = np.random.default_rng(6)
        f1 = rng.standard_normal((10, 6))
        f2 = rng.standard_normal((6, 3))
        g2 = np.abs(rng.standard_normal((3, 60))) + 0.05
        x = f1 @ f2 @ g2
        stack = pretrain_stack(x, [6, 3], seed=0, max_iter=2000, tol=1e-12)
        recon = stack.mappings[0] @ stack.mappings[1] @ stack.partitions[1]
        assert linalg.frob_sq(x - recon) < 1e-4 * linalg.frob_sq(x)

    def test_cascade_shapes_and_nonnegativity(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((12, 40))
        stack = pretrain_stack(x, [8, 4, 2], seed=1)
        assert [m.shape for m in stack.mappings] == [(12, 8), (8, 4), (4, 2)]
        assert [g.shape for g in stack.partitions] == [(8, 40), (4, 40), (2, 40)]
        for g in stack.partitions:
            assert np.all(g >= 0)

    def test_monotone_widths_required(self):
        with pytest.raises(DimensionError):
            pretrain_stack(np.ones((8, 20)), [3, 6], seed=0)

    def test_overcomplete_first_layer_allowed(self):
        # the first width may exceed the feature count as long as the
        # sample count supports it
        rng = np.random.default_rng(8)
        x = rng.standard_normal((4, 30))
        stack = pretrain_stack(x, [6, 2], seed=0, max_iter=50)
        assert stack.mappings[0].shape == (4, 6)
