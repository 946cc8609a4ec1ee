"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot kernels on workload shapes representative of the package's
heavy paths (exact enumeration sweeps, tester sample batches) and prints a
side-by-side table. Numba timings exclude the first (compilation) call.

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from causalscope._kernels import numpy_backend

try:
    from causalscope._kernels import numba_backend
except ImportError:
    numba_backend = None

from causalscope import Intervention, random_graph, random_smbn
from causalscope.model import _exact_table, _sampling_plan


def clock(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_product_of_factors(backend, n, seed, sweeps=200):
    g = random_graph(n, 2, 2, 2, seed=seed)
    m = random_smbn(g, seed=seed + 1)
    import causalscope.model as model_module
    saved = model_module.product_of_factors
    model_module.product_of_factors = backend.product_of_factors
    try:
        def run():
            for s in range(sweeps):
                _exact_table(m, Intervention({s % n: s % 2}), 1 << 26)
        run()  # warm (JIT compile on the numba path)
        return clock(run, repeats=3)
    finally:
        model_module.product_of_factors = saved


def bench_ancestral_draw(backend, n, seed, count=200_000):
    g = random_graph(n, 2, 2, 2, seed=seed)
    m = random_smbn(g, seed=seed + 1)
    flat, offsets, coeff_rows = _sampling_plan(m)
    n_hidden = len(g.bidirected)
    step_ids = np.arange(n_hidden + n, dtype=np.int64)
    step_slot = np.concatenate([np.arange(n_hidden) + n, np.arange(n)]).astype(np.int64)
    step_const = np.zeros(len(step_ids), dtype=np.int64)
    preset = np.zeros(n + n_hidden, dtype=np.int64)
    uniforms = np.random.default_rng(0).random((count, len(step_ids)))
    args = (preset, step_slot, offsets[step_ids], coeff_rows[step_ids],
            step_const, 2, flat, uniforms)
    backend.ancestral_draw(*args)  # warm
    return clock(lambda: backend.ancestral_draw(*args), repeats=3)


def main():
    rows = []
    for label, fn, kwargs in (
        ("product_of_factors n=7 (200 sweeps)", bench_product_of_factors, {"n": 7, "seed": 1}),
        ("product_of_factors n=9 (200 sweeps)", bench_product_of_factors, {"n": 9, "seed": 2}),
        ("ancestral_draw n=6, 200k samples", bench_ancestral_draw, {"n": 6, "seed": 3}),
        ("ancestral_draw n=10, 200k samples", bench_ancestral_draw, {"n": 10, "seed": 4}),
    ):
        t_np = fn(numpy_backend, **kwargs)
        t_nb = fn(numba_backend, **kwargs) if numba_backend else float("nan")
        rows.append((label, t_np, t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel workload':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for label, t_np, t_nb in rows:
        speedup = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{label:<{width}}  {t_np:>9.4f}s  {t_nb:>9.4f}s  {speedup:>7.1f}x")
    if numba_backend is None:
        print("numba unavailable; only the fallback path was timed")


if __name__ == "__main__":
    main()
