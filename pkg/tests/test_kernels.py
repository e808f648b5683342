"""Numba and numpy kernel flavours must agree."""

import numpy as np
import pytest

from corrcusum import kernels
from corrcusum._backend import NUMBA_AVAILABLE

pytestmark = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


@pytest.mark.parametrize("T,p", [(3, 2), (25, 3), (400, 5)])
def test_prefix_comoments_agree(rng, T, p):
    x = rng.normal(loc=3.0, size=(T, p))
    pairs = kernels.pair_indices(p)
    a = kernels.prefix_comoments_nb(x, pairs)
    b = kernels.prefix_comoments_np(x, pairs)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-10)


def test_prefix_comoments_long_series_stable(rng):
    # offset and length stress cancellation in the shifted-sum fallback
    x = rng.normal(loc=1e3, size=(100_000, 3))
    pairs = kernels.pair_indices(3)
    m2a, ca = kernels.prefix_comoments_nb(x, pairs)
    m2b, cb = kernels.prefix_comoments_np(x, pairs)
    ra = ca / np.sqrt(m2a[:, pairs[:, 0]] * m2a[:, pairs[:, 1]])
    rb = cb / np.sqrt(m2b[:, pairs[:, 0]] * m2b[:, pairs[:, 1]])
    np.testing.assert_allclose(ra[10:], rb[10:], atol=1e-9)
    xc = x - x.mean(axis=0)
    full = (xc[:, 0] @ xc[:, 1]) / np.sqrt((xc[:, 0] @ xc[:, 0]) * (xc[:, 1] @ xc[:, 1]))
    assert ra[-1, 0] == pytest.approx(full, abs=1e-12)


def test_constant_prefix_exact_zero_both_backends():
    x = np.array([[2.5, 1.0], [2.5, 3.0], [2.5, 2.0], [1.0, 0.0]])
    pairs = kernels.pair_indices(2)
    for fn in (kernels.prefix_comoments_nb, kernels.prefix_comoments_np):
        m2, _ = fn(x, pairs)
        assert m2[0, 0] == 0.0 and m2[1, 0] == 0.0 and m2[2, 0] > 0


def test_bootstrap_correlations_agree(rng):
    x = rng.normal(size=(120, 4))
    pairs = kernels.pair_indices(4)
    starts = rng.integers(0, 120 - 5 + 1, size=(30, 24))
    a, oka = kernels.bootstrap_correlations_nb(x, starts, 5, pairs)
    b, okb = kernels.bootstrap_correlations_np(x, starts, 5, pairs)
    np.testing.assert_array_equal(oka, okb)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_bootstrap_correlations_flag_constant_replicate():
    x = np.column_stack((np.r_[np.ones(10), np.arange(10.0)], np.arange(20.0) ** 2))
    pairs = kernels.pair_indices(2)
    starts = np.array([[0, 2], [0, 10]])
    for fn in (kernels.bootstrap_correlations_nb, kernels.bootstrap_correlations_np):
        corr, ok = fn(x, starts, 4, pairs)
        assert list(ok) == [False, True]
        assert np.isnan(corr[0, 0]) and np.isfinite(corr[1, 0])


@pytest.mark.parametrize("refine", [False, True])
@pytest.mark.parametrize("d", [1, 3])
def test_bridge_sup_agree(rng, d, refine):
    z = rng.standard_normal((40, d, 300))
    keys = rng.integers(0, 2**64, size=40, dtype=np.uint64)
    a = kernels.bridge_sup_l1_nb(z, keys, refine)
    b = kernels.bridge_sup_l1_np(z, keys, refine)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_bridge_sup_grid_matches_direct_formula(rng):
    z = rng.standard_normal((5, 2, 50))
    w = np.cumsum(z, axis=2) / np.sqrt(50)
    s = np.arange(1, 51) / 50
    direct = np.abs(w - s * w[:, :, -1:]).sum(axis=1).max(axis=1)
    keys = np.zeros(5, dtype=np.uint64)
    np.testing.assert_allclose(kernels.bridge_sup_l1_nb(z, keys, False), direct, rtol=1e-13)


def test_refinement_never_lowers_the_grid_maximum(rng):
    z = rng.standard_normal((200, 2, 100))
    keys = rng.integers(0, 2**64, size=200, dtype=np.uint64)
    grid = kernels.bridge_sup_l1_nb(z, keys, False)
    ref = kernels.bridge_sup_l1_nb(z, keys, True)
    assert np.all(ref >= grid)
    assert np.mean(ref - grid) > 0


def test_counter_uniform_range_and_determinism():
    keys = np.arange(1000, dtype=np.uint64)
    u = kernels.counter_uniform_np(keys, np.full(1000, 7))
    assert np.all((u > 0) & (u <= 1))
    np.testing.assert_array_equal(u, kernels.counter_uniform_np(keys, np.full(1000, 7)))
    assert abs(u.mean() - 0.5) < 0.05
