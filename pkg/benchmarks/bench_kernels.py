#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs both backends on the two hot operations (nearest-neighbor squared
distances and lattice rasterization) over a range of sizes and prints a
timing table with speedups. The numba path is compiled before timing starts
so JIT cost is excluded; pass --repeat to change the per-cell sample count.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeat 5 --sizes 1024 4096 16384
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from aeroprompt import kernels
from aeroprompt.genbridge import GenerationRequest, SyntheticGenerator
from aeroprompt.geometry import sample_surface


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_nearest(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'n points':>10} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for n in sizes:
        a = rng.uniform(-1, 1, size=(n, 3))
        b = rng.uniform(-1, 1, size=(n, 3))
        t_np = best_of(lambda: kernels.nearest_sqdist_numpy(a, b), repeat)
        t_nb = best_of(lambda: kernels.nearest_sqdist_numba(a, b), repeat)
        print(f"{n:>10d} {t_np*1e3:>10.2f}ms {t_nb*1e3:>10.2f}ms {t_np/t_nb:>8.1f}x")


def bench_cover(resolutions, repeat):
    gen = SyntheticGenerator()
    mesh = gen.generate(GenerationRequest(prompt="A car", seed=0)).meshes[0]
    proj = mesh.vertices[:, 1:3]
    tris = proj[mesh.faces]
    lo = proj.min(axis=0)
    hi = proj.max(axis=0)
    print(f"{'grid res':>10} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for res in resolutions:
        hy = (hi[0] - lo[0]) / res
        hz = (hi[1] - lo[1]) / res
        args = (tris, float(lo[0]), float(lo[1]), hy, hz, res)
        t_np = best_of(lambda: kernels.cover_lattice_numpy(*args), repeat)
        t_nb = best_of(lambda: kernels.cover_lattice_numba(*args), repeat)
        print(f"{res:>10d} {t_np*1e3:>10.2f}ms {t_nb*1e3:>10.2f}ms {t_np/t_nb:>8.1f}x")


def bench_chamfer_end_to_end(repeat):
    """Whole-pipeline sanity number: one Chamfer distance at sweep scale."""
    gen = SyntheticGenerator()
    meshes = gen.generate(GenerationRequest(prompt="A car", seed=0, batch_size=2)).meshes
    a = sample_surface(meshes[0], 16384, seed=0).points
    b = sample_surface(meshes[1], 16384, seed=0).points

    def chamfer(nearest):
        return nearest(a, b).mean() + nearest(b, a).mean()

    t_np = best_of(lambda: chamfer(kernels.nearest_sqdist_numpy), repeat)
    t_nb = best_of(lambda: chamfer(kernels.nearest_sqdist_numba), repeat)
    print(f"chamfer 16384x16384: numpy {t_np*1e3:.1f}ms, numba {t_nb*1e3:.1f}ms, "
          f"{t_np/t_nb:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="samples per cell; the minimum is reported")
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[512, 2048, 8192],
                        help="point-cloud sizes for the nearest-neighbor table")
    parser.add_argument("--resolutions", type=int, nargs="+",
                        default=[128, 256, 512],
                        help="grid resolutions for the rasterization table")
    args = parser.parse_args()

    if not kernels.USE_NUMBA:
        raise SystemExit(
            "numba backend unavailable (AEROPROMPT_NO_NUMBA set?); "
            "nothing to compare"
        )
    kernels.warm_up()

    print("nearest-neighbor squared distances")
    bench_nearest(args.sizes, args.repeat)
    print()
    print("projected-triangle lattice coverage")
    bench_cover(args.resolutions, args.repeat)
    print()
    bench_chamfer_end_to_end(args.repeat)


if __name__ == "__main__":
    main()
