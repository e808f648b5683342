"""Moving block bootstrap estimate of the covariance of ``sqrt(T) * rho_T``."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Panel
from .errors import DegenerateError, InputError

__all__ = [
    "BootstrapConfig",
    "EMatrix",
    "default_block_length",
    "replicate_rng",
    "draw_block_starts",
    "resample_panel",
    "estimate_E",
]

# Spawn-key tags keep the bootstrap streams disjoint from other uses of a seed.
_STREAM_TAG = 0xB007


def default_block_length(T):
    """``floor(T ** 0.25)``, at least 1."""
    T = int(T)
    if T < 3:
        raise InputError(f"T must be >= 3, got {T}")
    l = int(np.floor(T ** 0.25))
    # guard the floor against pow() rounding at exact fourth powers
    while (l + 1) ** 4 <= T:
        l += 1
    while l > 1 and l ** 4 > T:
        l -= 1
    return max(1, l)


@dataclass(frozen=True)
class BootstrapConfig:
    """Block length, number of replicates and the 64-bit seed."""

    block_length: int
    replications: int = 199
    seed: int = 0

    def __post_init__(self):
        if int(self.block_length) < 1:
            raise InputError(f"block length must be >= 1, got {self.block_length}")
        if int(self.replications) < 2:
            raise InputError(f"need at least 2 bootstrap replications, got {self.replications}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")

    def validate_for(self, T):
        if not 1 <= self.block_length < T:
            raise InputError(f"block length must satisfy 1 <= l < T={T}, got {self.block_length}")

    def as_dict(self):
        return {
            "block_length": int(self.block_length),
            "bootstrap": int(self.replications),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class EMatrix:
    """Bootstrap covariance estimate with the configuration that produced it."""

    m: np.ndarray
    config: BootstrapConfig
    redraws: int = 0

    @property
    def d(self):
        return self.m.shape[0]


def replicate_rng(seed, b, attempt=0):
    """Independent generator for bootstrap replicate ``b`` (and redraw ``attempt``)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_STREAM_TAG, int(b), int(attempt)))
    return np.random.Generator(np.random.PCG64(ss))


def draw_block_starts(T, block_length, rng):
    """``floor(T / l)`` start rows drawn uniformly from the ``T - l + 1`` blocks."""
    n_blocks = T - block_length + 1
    return rng.integers(0, n_blocks, size=T // block_length)


def resample_panel(panel: Panel, block_length, rng) -> Panel:
    """One moving-block bootstrap series of length ``floor(T/l) * l``."""
    T = panel.T
    block_length = int(block_length)
    if not 1 <= block_length < T:
        raise InputError(f"block length must satisfy 1 <= l < T={T}, got {block_length}")
    starts = draw_block_starts(T, block_length, rng)
    idx = (starts[:, None] + np.arange(block_length)).ravel()
    return Panel(panel.data[idx], labels=panel.labels)


def estimate_E(panel: Panel, cfg: BootstrapConfig) -> EMatrix:
    """Bootstrap covariance matrix of ``sqrt(T) * rho_T``.

    Each replicate ``b`` draws its blocks from its own stream
    (:func:`replicate_rng`), so the estimate for ``B`` replications shares
    its first replicates with every larger ``B`` at the same seed. The
    covariance is centered at the bootstrap mean and divided by ``B - 1``.
    A replicate with a constant column is redrawn from a fresh stream; more
    than ``10 * B`` redraws in total raise :class:`DegenerateError`.
    """
    T = panel.T
    cfg.validate_for(T)
    B, l = int(cfg.replications), int(cfg.block_length)
    pairs = panel.pairs
    starts = np.stack([draw_block_starts(T, l, replicate_rng(cfg.seed, b)) for b in range(B)])
    corr, ok = kernels.bootstrap_correlations(panel.data, starts, l, pairs)

    redraws = 0
    attempt = np.zeros(B, dtype=np.int64)
    while not np.all(ok):
        bad = np.flatnonzero(~ok)
        redraws += bad.size
        if redraws > 10 * B:
            raise DegenerateError(
                f"more than {10 * B} degenerate bootstrap replicates (constant resampled column)"
            )
        attempt[bad] += 1
        new_starts = np.stack(
            [draw_block_starts(T, l, replicate_rng(cfg.seed, b, attempt[b])) for b in bad]
        )
        new_corr, new_ok = kernels.bootstrap_correlations(panel.data, new_starts, l, pairs)
        corr[bad] = new_corr
        ok[bad] = new_ok

    vecs = np.sqrt(T) * corr
    centered = vecs - vecs.mean(axis=0)
    m = centered.T @ centered / (B - 1)
    m = 0.5 * (m + m.T)
    return EMatrix(m=m, config=cfg, redraws=redraws)
