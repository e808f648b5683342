"""Time the numba kernels against their pure-numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once per backend before timing so that numba
compilation is excluded. The best of ``--repeat`` runs is reported.
"""

import argparse
import time

import numpy as np

from corrcusum import kernels
from corrcusum._backend import NUMBA_AVAILABLE


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    x = rng.normal(size=(5000, 4))
    pairs = kernels.pair_indices(4)
    starts = rng.integers(0, 5000 - 8 + 1, size=(199, 5000 // 8))
    z = rng.standard_normal((256, 6, 1000))
    keys = rng.integers(0, 2**64, size=256, dtype=np.uint64)
    return [
        ("prefix_comoments  T=5000 p=4",
         lambda: kernels.prefix_comoments_nb(x, pairs),
         lambda: kernels.prefix_comoments_np(x, pairs)),
        ("bootstrap_corr    T=5000 B=199 l=8",
         lambda: kernels.bootstrap_correlations_nb(x, starts, 8, pairs),
         lambda: kernels.bootstrap_correlations_np(x, starts, 8, pairs)),
        ("bridge_sup_l1     256 paths d=6 n=1000",
         lambda: kernels.bridge_sup_l1_nb(z, keys, True),
         lambda: kernels.bridge_sup_l1_np(z, keys, True)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, nb, npf in cases(rng):
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(npf, args.repeat)
        print(f"{name:40s} {1e3 * t_nb:10.2f} {1e3 * t_np:10.2f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
