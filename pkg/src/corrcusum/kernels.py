"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names (``prefix_comoments``, ``bootstrap_correlations``,
``bridge_sup_l1``) dispatch on :data:`corrcusum._backend.USE_NUMBA`.
The ``*_nb`` / ``*_np`` variants are importable directly so tests and the
benchmark can compare both paths in one process.

Random numbers are never drawn inside a kernel. Callers pass pre-drawn
arrays (or 64-bit keys for the counter-based uniforms of the bridge
refinement) so both flavours consume the same stream.
"""

import numpy as np

from ._backend import USE_NUMBA, njit

__all__ = [
    "pair_indices",
    "prefix_comoments",
    "prefix_comoments_nb",
    "prefix_comoments_np",
    "bootstrap_correlations",
    "bootstrap_correlations_nb",
    "bootstrap_correlations_np",
    "bridge_sup_l1",
    "bridge_sup_l1_nb",
    "bridge_sup_l1_np",
    "counter_uniform_np",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Conditional-max sampling is skipped for grid intervals whose endpoints sit
# more than this many local standard deviations below the running maximum;
# the neglected exceedance probability is below exp(-2 * 4.0**2) ~ 1e-14.
_REFINE_BAND = 4.0


def pair_indices(p):
    """Return the ``(d, 2)`` array of unordered pairs ``(i, j)``, ``i < j``.

    Order is lexicographic: (0,1), (0,2), ..., (0,p-1), (1,2), ..., (p-2,p-1).
    """
    iu, ju = np.triu_indices(p, k=1)
    return np.column_stack((iu, ju)).astype(np.int64)


# ---------------------------------------------------------------------------
# Prefix (successive) correlations
# ---------------------------------------------------------------------------

@njit(cache=True)
def prefix_comoments_nb(x, pairs):
    T, p = x.shape
    d = pairs.shape[0]
    mean = np.zeros(p)
    m2 = np.zeros(p)
    cxy = np.zeros(d)
    delta = np.empty(p)
    resid = np.empty(p)
    out_m2 = np.empty((T - 1, p))
    out_c = np.empty((T - 1, d))
    for t in range(T):
        k = t + 1.0
        for i in range(p):
            delta[i] = x[t, i] - mean[i]
            mean[i] += delta[i] / k
            resid[i] = x[t, i] - mean[i]
            m2[i] += delta[i] * resid[i]
        for q in range(d):
            cxy[q] += delta[pairs[q, 0]] * resid[pairs[q, 1]]
        if t >= 1:
            for i in range(p):
                out_m2[t - 1, i] = m2[i]
            for q in range(d):
                out_c[t - 1, q] = cxy[q]
    return out_m2, out_c


def prefix_comoments_np(x, pairs):
    x = np.asarray(x, dtype=np.float64)
    T = x.shape[0]
    # shifting by the first row keeps constant prefixes at exact zero
    y = x - x[0]
    k = np.arange(1, T + 1, dtype=np.float64)[:, None]
    s1 = np.cumsum(y, axis=0)
    s2 = np.cumsum(y * y, axis=0)
    m2 = np.maximum(s2 - s1 * s1 / k, 0.0)
    i, j = pairs[:, 0], pairs[:, 1]
    sxy = np.cumsum(y[:, i] * y[:, j], axis=0)
    cxy = sxy - s1[:, i] * s1[:, j] / k
    return m2[1:], cxy[1:]


def prefix_comoments(x, pairs):
    """Centered second moments of every prefix ``x[:k]``, ``k = 2..T``.

    Returns ``(m2, cxy)`` of shapes ``(T-1, p)`` and ``(T-1, d)``: the sums of
    squared deviations per column and the sums of cross deviations per pair,
    both about the prefix means.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    pairs = np.ascontiguousarray(pairs, dtype=np.int64)
    if USE_NUMBA:
        return prefix_comoments_nb(x, pairs)
    return prefix_comoments_np(x, pairs)


# ---------------------------------------------------------------------------
# Moving-block bootstrap replicates
# ---------------------------------------------------------------------------

@njit(cache=True)
def bootstrap_correlations_nb(x, starts, block_length, pairs):
    T, p = x.shape
    B, nb = starts.shape
    d = pairs.shape[0]
    L = nb * block_length
    out = np.empty((B, d))
    ok = np.ones(B, dtype=np.bool_)
    mean = np.empty(p)
    var = np.empty(p)
    cov = np.empty(d)
    for b in range(B):
        for i in range(p):
            mean[i] = 0.0
            var[i] = 0.0
        for q in range(d):
            cov[q] = 0.0
        for r in range(nb):
            s = starts[b, r]
            for t in range(s, s + block_length):
                for i in range(p):
                    mean[i] += x[t, i]
        for i in range(p):
            mean[i] /= L
        for r in range(nb):
            s = starts[b, r]
            for t in range(s, s + block_length):
                for i in range(p):
                    v = x[t, i] - mean[i]
                    var[i] += v * v
                for q in range(d):
                    cov[q] += (x[t, pairs[q, 0]] - mean[pairs[q, 0]]) * (
                        x[t, pairs[q, 1]] - mean[pairs[q, 1]]
                    )
        for i in range(p):
            if not var[i] > 0.0:
                ok[b] = False
        for q in range(d):
            if ok[b]:
                r = cov[q] / np.sqrt(var[pairs[q, 0]] * var[pairs[q, 1]])
                out[b, q] = min(1.0, max(-1.0, r))
            else:
                out[b, q] = np.nan
    return out, ok


def bootstrap_correlations_np(x, starts, block_length, pairs):
    B, nb = starts.shape
    idx = (starts[:, :, None] + np.arange(block_length)).reshape(B, nb * block_length)
    xb = x[idx]  # (B, L, p)
    xc = xb - xb.mean(axis=1, keepdims=True)
    var = np.einsum("blp,blp->bp", xc, xc)
    i, j = pairs[:, 0], pairs[:, 1]
    cov = np.einsum("blq,blq->bq", xc[:, :, i], xc[:, :, j])
    ok = np.all(var > 0.0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.clip(cov / np.sqrt(var[:, i] * var[:, j]), -1.0, 1.0)
    out[~ok] = np.nan
    return out, ok


def bootstrap_correlations(x, starts, block_length, pairs):
    """Full-sample correlation vector of each block-bootstrap replicate.

    Replicate ``b`` is the concatenation of rows
    ``starts[b, r] : starts[b, r] + block_length`` for ``r = 0..nb-1``.
    Returns ``(corr, ok)``; ``ok[b]`` is False when a resampled column is
    constant, in which case ``corr[b]`` is NaN.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    pairs = np.ascontiguousarray(pairs, dtype=np.int64)
    if USE_NUMBA:
        return bootstrap_correlations_nb(x, starts, int(block_length), pairs)
    return bootstrap_correlations_np(x, starts, int(block_length), pairs)


# ---------------------------------------------------------------------------
# Supremum of the L1 norm of independent Brownian bridges
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def counter_uniform_np(keys, counters):
    """Uniforms on (0, 1] from a splitmix64 counter stream.

    Value ``(key, m)`` is the finaliser applied to ``key + m * golden``;
    identical in the numba kernel.
    """
    with np.errstate(over="ignore"):
        z = np.asarray(keys, dtype=np.uint64) + np.asarray(counters, dtype=np.uint64) * _GAMMA
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z = z ^ (z >> _S31)
    return 1.0 - (z >> _S11).astype(np.float64) * _INV53


@njit(cache=True)
def bridge_sup_l1_nb(z, keys, refine):
    m, d, n = z.shape
    out = np.empty(m)
    w = np.empty((d, n))
    l1 = np.empty(n + 1)
    rootn = np.sqrt(n)
    h = d / n  # variance of sum_i sign_i * B_i over one grid step
    band = _REFINE_BAND * np.sqrt(h)
    for path in range(m):
        for i in range(d):
            acc = 0.0
            for t in range(n):
                acc += z[path, i, t]
                w[i, t] = acc / rootn
        l1[0] = 0.0
        best = 0.0
        for t in range(n):
            s = (t + 1.0) / n
            tot = 0.0
            for i in range(d):
                tot += abs(w[i, t] - s * w[i, n - 1])
            l1[t + 1] = tot
            if tot > best:
                best = tot
        if refine:
            thr = best - band
            key = keys[path]
            for t in range(1, n + 1):
                a = l1[t - 1]
                b = l1[t]
                if max(a, b) > thr:
                    u = _mix64(key + np.uint64(t) * _GAMMA)
                    uu = 1.0 - float(u >> _S11) * _INV53
                    diff = b - a
                    mx = 0.5 * (a + b + np.sqrt(diff * diff - 2.0 * h * np.log(uu)))
                    if mx > best:
                        best = mx
        out[path] = best
    return out


def bridge_sup_l1_np(z, keys, refine):
    m, d, n = z.shape
    w = np.cumsum(z, axis=2) / np.sqrt(n)
    s = np.arange(1, n + 1, dtype=np.float64) / n
    l1 = np.abs(w - s * w[:, :, -1:]).sum(axis=1)
    l1 = np.concatenate((np.zeros((m, 1)), l1), axis=1)
    best = l1.max(axis=1)
    if not refine:
        return best
    h = d / n
    lo, hi = l1[:, :-1], l1[:, 1:]
    cand = np.maximum(lo, hi) > (best - _REFINE_BAND * np.sqrt(h))[:, None]
    rows, cols = np.nonzero(cand)
    a, b = lo[rows, cols], hi[rows, cols]
    u = counter_uniform_np(np.asarray(keys, dtype=np.uint64)[rows], cols + 1)
    mx = 0.5 * (a + b + np.sqrt((b - a) ** 2 - 2.0 * h * np.log(u)))
    refined = np.full(m, -np.inf)
    np.maximum.at(refined, rows, mx)
    return np.maximum(best, refined)


def bridge_sup_l1(z, keys, refine=True):
    """``sup_s sum_i |B_i(s)|`` for each path of ``d`` independent bridges.

    Parameters
    ----------
    z : ndarray, shape (paths, d, n)
        Standard normal increments. ``W(m/n)`` is the partial sum of the
        first ``m`` increments divided by ``sqrt(n)`` and
        ``B(s) = W(s) - s W(1)``.
    keys : ndarray of uint64, shape (paths,)
        Per-path keys for the counter-based uniforms used by ``refine``.
    refine : bool
        When False, return the maximum over grid points only. When True,
        also draw the exact conditional maximum of the bridge inside each
        grid interval close to the running maximum, which removes the
        downward bias of monitoring on a grid.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if USE_NUMBA:
        return bridge_sup_l1_nb(z, keys, bool(refine))
    return bridge_sup_l1_np(z, keys, bool(refine))
