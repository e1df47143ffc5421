"""Time every numpy/numba kernel pair and report the speedups.

Usage: python3 benchmarks/bench_backends.py [--repeats 5]

Sizes mirror the default desk-scale run (k = 1024 cells, batch 256), so the
numbers translate directly into run wall time.  Each kernel is warmed first,
then timed best-of-N, so jit compilation never pollutes the figures.
"""

import argparse
import sys
import time

import numpy as np

from smolqd import kernels
from smolqd.backends import NUMBA_AVAILABLE
from smolqd.crawler import CrawlerParams, _rollout_numpy, mlp_layer_sizes, mlp_param_count


def best_of(fn, repeats, inner):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def build_cases(rng):
    """(name, numpy closure, numba closure, inner iterations)."""
    descs = rng.random((256, 2))
    centroids = rng.random((1024, 2))
    genomes = rng.standard_normal((256, 8))
    pa = rng.standard_normal((256, 659))
    pb = rng.standard_normal((256, 659))
    eps = rng.standard_normal((256, 659))
    lam = rng.standard_normal(256)

    params = CrawlerParams()
    layer_sizes = mlp_layer_sizes(params.n_masses, (16, 16))
    crawler_genome = rng.standard_normal(mlp_param_count(layer_sizes)) * 0.5
    crawler_args = (
        crawler_genome,
        layer_sizes,
        1.0,
        params.n_masses,
        params.mass,
        params.rest_length,
        params.k_s,
        params.c_s,
        params.gear,
        params.gravity,
        params.k_g,
        params.c_g,
        params.mu,
        params.dt,
        params.episode_steps,
    )

    return [
        (
            "assign_batch (256 x 1024 cells)",
            lambda: kernels.assign_batch_numpy(descs, centroids),
            lambda: kernels.assign_batch_numba(descs, centroids),
            50,
        ),
        (
            "arm_eval_batch (256 x 8 joints)",
            lambda: kernels.arm_eval_batch_numpy(genomes, 1.25, 1.5),
            lambda: kernels.arm_eval_batch_numba(genomes, 1.25, 1.5),
            200,
        ),
        (
            "iso_line_batch (256 x 659)",
            lambda: kernels.iso_line_batch_numpy(pa, pb, 0.005, 0.05, eps, lam),
            lambda: kernels.iso_line_batch_numba(pa, pb, 0.005, 0.05, eps, lam),
            100,
        ),
        (
            "crawler rollout (500 steps)",
            # the vectorized reference for the rollout lives in crawler.py
            lambda: _rollout_numpy(crawler_genome, 1.0, params, layer_sizes, 0.0, None, False),
            lambda: kernels.crawler_rollout_numba(*crawler_args),
            5,
        ),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of repetitions")
    args = parser.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba is not importable here; nothing to compare against.", file=sys.stderr)
        return 1

    cases = build_cases(np.random.default_rng(0))
    print(f"{'kernel':<34} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, numpy_fn, numba_fn, inner in cases:
        numpy_fn()  # warm caches
        numba_fn()  # trigger jit before timing
        t_numpy = best_of(numpy_fn, args.repeats, inner)
        t_numba = best_of(numba_fn, args.repeats, inner)
        print(
            f"{name:<34} {t_numpy * 1e3:>10.3f}ms {t_numba * 1e3:>10.3f}ms "
            f"{t_numpy / t_numba:>8.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
