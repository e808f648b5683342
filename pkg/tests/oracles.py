"""Independent reference computations used as test oracles.

Everything here is deliberately naive: plain Python loops over rows and
pairs, closed forms, series expansions. Nothing imports the package's
kernels.
"""

import math

import numpy as np


def pearson(xs, ys):
    """Textbook Pearson correlation with prefix means and non-Bessel sums."""
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def naive_pairs(p):
    return [(i, j) for i in range(p) for j in range(i + 1, p)]


def naive_prefix_rho(x):
    """``rho[k][q]`` for k = 2..T (list index k - 2), None where undefined."""
    x = np.asarray(x, dtype=float)
    T, p = x.shape
    out = []
    for k in range(2, T + 1):
        row = []
        for i, j in naive_pairs(p):
            row.append(pearson(list(x[:k, i]), list(x[:k, j])))
        out.append(row)
    return out


def naive_process(x, mat=None):
    """Weighted L1 deviation process by a triple loop; None for skipped k."""
    rho = naive_prefix_rho(x)
    T = len(rho) + 1
    full = rho[-1]
    d = len(full)
    out = []
    for k in range(2, T + 1):
        row = rho[k - 2]
        if any(v is None for v in row):
            out.append(None)
            continue
        diff = [row[q] - full[q] for q in range(d)]
        if mat is not None:
            diff = [sum(mat[a][b] * diff[b] for b in range(d)) for a in range(d)]
        out.append(k / math.sqrt(T) * sum(abs(v) for v in diff))
    return out


def naive_q(x, mat=None):
    vals = [v for v in naive_process(x, mat) if v is not None]
    return max(vals)


def kolmogorov_cdf(x, terms=200):
    """P(sup |B| <= x) = 1 - 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)."""
    return 1.0 - 2.0 * sum((-1) ** (k - 1) * math.exp(-2.0 * k * k * x * x)
                           for k in range(1, terms + 1))


def kolmogorov_quantile(level):
    """Invert :func:`kolmogorov_cdf` by bisection."""
    lo, hi = 0.2, 5.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def step_drift(s, z0, level=1.0, magnitude=1.0, var_prod=1.0):
    """Closed form of ``int_0^s g - s int_0^1 g`` for g jumping 0 -> level at z0."""
    return magnitude / math.sqrt(var_prod) * level * (max(s - z0, 0.0) - s * (1.0 - z0))


def sym2_eig(a, b, c):
    """Eigenvalues and eigenvectors of [[a, b], [b, c]] in closed form."""
    mean = 0.5 * (a + c)
    rad = math.sqrt(0.25 * (a - c) ** 2 + b * b)
    l1, l2 = mean - rad, mean + rad
    if b == 0:
        vecs = [[1.0, 0.0], [0.0, 1.0]] if a <= c else [[0.0, 1.0], [1.0, 0.0]]
    else:
        v1 = [b, l1 - a]
        v2 = [b, l2 - a]
        n1 = math.hypot(*v1)
        n2 = math.hypot(*v2)
        vecs = [[v1[0] / n1, v2[0] / n2], [v1[1] / n1, v2[1] / n2]]
    return (l1, l2), vecs


def bridge_sup_second_simulator(d, grid_n, paths, seed):
    """Grid + Brownian-bridge-refined sup of ||B^d||_1 via a different route.

    Builds bridges from a Brownian motion sampled with Philox and the
    representation ``B(s) = W(s) - s W(1)`` computed in float64 per path,
    refines each interval with inverse-transform conditional maxima drawn
    from the same Philox stream. Shares no code with the package.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    s = np.arange(0, grid_n + 1) / grid_n
    h = d / grid_n
    out = np.empty(paths)
    chunk = 500
    for start in range(0, paths, chunk):
        m = min(chunk, paths - start)
        inc = rng.normal(0.0, math.sqrt(1.0 / grid_n), size=(m, grid_n, d))
        w = np.concatenate((np.zeros((m, 1, d)), np.cumsum(inc, axis=1)), axis=1)
        b = w - s[None, :, None] * w[:, -1:, :]
        l1 = np.abs(b).sum(axis=2)
        a, c = l1[:, :-1], l1[:, 1:]
        u = 1.0 - rng.random(size=a.shape)
        mx = 0.5 * (a + c + np.sqrt((c - a) ** 2 - 2.0 * h * np.log(u)))
        out[start:start + m] = np.maximum(l1.max(axis=1), mx.max(axis=1))
    return np.sort(out)
