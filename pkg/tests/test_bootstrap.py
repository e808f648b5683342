import numpy as np
import pytest

from corrcusum import BootstrapConfig, DegenerateError, InputError, Panel, estimate_E
from corrcusum.bootstrap import (
    default_block_length,
    draw_block_starts,
    replicate_rng,
    resample_panel,
)


@pytest.mark.parametrize("T,expected", [(200, 3), (500, 4), (1000, 5), (3, 1), (16, 2), (81, 3),
                                        (1414, 6)])
def test_default_block_length(T, expected):
    assert default_block_length(T) == expected


def test_config_validation():
    with pytest.raises(InputError):
        BootstrapConfig(0)
    with pytest.raises(InputError):
        BootstrapConfig(3, replications=1)
    with pytest.raises(InputError):
        BootstrapConfig(3, seed=-1)
    with pytest.raises(InputError):
        estimate_E(Panel(np.random.default_rng(0).normal(size=(10, 2))), BootstrapConfig(10))


def test_resample_unit_blocks_is_row_resampling(rng):
    x = rng.normal(size=(13, 2))
    out = resample_panel(Panel(x), 1, replicate_rng(5, 0))
    assert out.T == 13
    rows = {tuple(r) for r in x}
    assert all(tuple(r) in rows for r in out.data)


def test_resample_longest_block(rng):
    x = rng.normal(size=(9, 2))
    out = resample_panel(Panel(x), 8, replicate_rng(1, 0))
    assert out.T == 8
    assert np.array_equal(out.data, x[:8]) or np.array_equal(out.data, x[1:])


def test_resample_blocks_are_contiguous(rng):
    T, l = 10, 3
    x = np.column_stack((np.arange(T, dtype=float), rng.normal(size=T)))
    for seed in range(20):
        out = resample_panel(Panel(x), l, replicate_rng(seed, 0))
        assert out.T == 9
        idx = out.data[:, 0].astype(int)
        for b in range(3):
            blk = idx[b * l:(b + 1) * l]
            assert np.array_equal(blk, np.arange(blk[0], blk[0] + l))
            assert 0 <= blk[0] <= T - l


def test_resample_rejects_bad_block_length(rng):
    with pytest.raises(InputError):
        resample_panel(Panel(rng.normal(size=(5, 2))), 5, replicate_rng(0, 0))


def test_estimate_E_symmetric_psd_and_deterministic(rng, backend):
    panel = Panel(rng.normal(size=(150, 4)))
    cfg = BootstrapConfig(3, 99, seed=42)
    e1, e2 = estimate_E(panel, cfg), estimate_E(panel, cfg)
    assert np.array_equal(e1.m, e2.m)
    assert e1.d == 6
    np.testing.assert_allclose(e1.m, e1.m.T, atol=0)
    assert np.linalg.eigvalsh(e1.m)[0] >= -1e-10 * np.abs(e1.m).max()


def test_estimate_E_same_across_backends(rng, monkeypatch):
    from corrcusum import kernels

    panel = Panel(rng.normal(size=(100, 3)))
    cfg = BootstrapConfig(4, 50, seed=9)
    monkeypatch.setattr(kernels, "USE_NUMBA", True)
    a = estimate_E(panel, cfg).m
    monkeypatch.setattr(kernels, "USE_NUMBA", False)
    b = estimate_E(panel, cfg).m
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_estimate_E_matches_explicit_resampling(rng):
    # independent route: materialize each replicate with resample_panel
    panel = Panel(rng.normal(size=(60, 3)))
    cfg = BootstrapConfig(4, 25, seed=3)
    vecs = []
    for b in range(cfg.replications):
        rep = resample_panel(panel, 4, replicate_rng(cfg.seed, b)).data
        c = np.corrcoef(rep, rowvar=False)
        vecs.append(np.sqrt(panel.T) * c[np.triu_indices(3, 1)])
    expected = np.cov(np.array(vecs), rowvar=False, ddof=1)
    np.testing.assert_allclose(estimate_E(panel, cfg).m, expected, atol=1e-10)


def test_estimate_E_identical_columns_is_zero(rng):
    x = rng.normal(size=80)
    e = estimate_E(Panel(np.column_stack((x, x))), BootstrapConfig(3, 30, 1))
    np.testing.assert_allclose(e.m, 0.0, atol=1e-20)


def test_estimate_E_scale_invariance(rng):
    x = rng.normal(size=(120, 3))
    cfg = BootstrapConfig(3, 60, 8)
    a = estimate_E(Panel(x), cfg).m
    b = estimate_E(Panel(x * np.array([2.0, 0.1, 30.0]) + 5.0), cfg).m
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_estimate_E_replicates_nest_across_B(rng):
    # per-replicate streams: the B=10 draws are the first 10 of the B=20 draws
    from corrcusum import kernels

    panel = Panel(rng.normal(size=(50, 3)))
    pairs = panel.pairs

    def vecs(B):
        starts = np.stack([draw_block_starts(50, 3, replicate_rng(7, b)) for b in range(B)])
        return kernels.bootstrap_correlations(panel.data, starts, 3, pairs)[0]

    np.testing.assert_array_equal(vecs(20)[:10], vecs(10))
    v = np.sqrt(50) * vecs(10)
    expected = np.cov(v, rowvar=False, ddof=1)
    np.testing.assert_allclose(estimate_E(panel, BootstrapConfig(3, 10, 7)).m, expected, atol=1e-12)


def test_estimate_E_redraws_degenerate_replicates():
    # long constant stretch makes single-block replicates constant sometimes
    x = np.column_stack((np.r_[np.zeros(8), [1.0, -1.0]], np.arange(10.0)))
    e = estimate_E(Panel(x), BootstrapConfig(8, 40, 0))
    assert e.redraws > 0
    assert np.all(np.isfinite(e.m))


def test_estimate_E_gives_up_after_too_many_redraws():
    # only the last of 51 blocks sees the single nonzero row, so about 25 draws
    # per replicate are needed on average, beyond the 10 * B budget
    x = np.column_stack((np.r_[np.zeros(99), [1.0]], np.arange(100.0)))
    with pytest.raises(DegenerateError):
        estimate_E(Panel(x), BootstrapConfig(50, 50, 0))
