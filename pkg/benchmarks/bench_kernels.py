#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run directly: `python3 benchmarks/bench_kernels.py [--repeats N]`.
The first numba call includes JIT compilation; a warm-up pass is timed
separately so the steady-state comparison is fair.
"""

import argparse
import time

import numpy as np

from cloudsketch import _kernels_numba as numba_impl
from cloudsketch import _kernels_numpy as numpy_impl
from cloudsketch.geometry import Viewpoint, fibonacci_viewpoints, normalize_unit
from cloudsketch.procedural import make_mug
from cloudsketch.render import camera_basis, _fit_to_image


def triangle_workload(canvas=512):
    mesh = make_mug(1.3)
    verts, _ = normalize_unit(mesh.vertices)
    frame = camera_basis(fibonacci_viewpoints(102)[37])
    u = verts @ frame.right
    v = verts @ frame.up
    px, py = _fit_to_image(u, v, canvas, canvas, 0.1)
    tris = np.empty((len(mesh.faces), 3, 2))
    tris[:, :, 0] = px[mesh.faces]
    tris[:, :, 1] = py[mesh.faces]
    return tris, canvas


def bench(label, fn, args, repeats):
    t0 = time.perf_counter()
    fn(*args)
    warm = time.perf_counter() - t0
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    best = min(times)
    print(f"  {label:8s} warm-up {warm * 1e3:8.1f} ms   best of {repeats}: {best * 1e3:8.2f} ms")
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    tris, canvas = triangle_workload()
    print(f"fill_triangles: {len(tris)} triangles at {canvas}x{canvas}")
    b_nb = bench("numba", numba_impl.fill_triangles, (tris, canvas, canvas), args.repeats)
    b_np = bench("numpy", numpy_impl.fill_triangles, (tris, canvas, canvas), args.repeats)
    print(f"  speedup {b_np / b_nb:.1f}x")

    img = rng.integers(0, 256, (512, 512)).astype(np.uint8)
    print("median_filter_u8: 512x512, k=3")
    b_nb = bench("numba", numba_impl.median_filter_u8, (img, 3), args.repeats)
    b_np = bench("numpy", numpy_impl.median_filter_u8, (img, 3), args.repeats)
    print(f"  speedup {b_np / b_nb:.1f}x")

    mask = np.zeros((512, 512), np.uint8)
    yy, xx = np.mgrid[0:512, 0:512]
    for r in (60, 120, 180, 230):
        ring = np.abs(np.hypot(xx - 256, yy - 256) - r) <= 2
        mask[ring] = 1
    print(f"trace_borders: 512x512, {int(mask.sum())} ink px")
    b_nb = bench("numba", numba_impl.trace_borders, (mask,), args.repeats)
    b_np = bench("numpy", numpy_impl.trace_borders, (mask,), args.repeats)
    print(f"  speedup {b_np / b_nb:.1f}x")

    mag = rng.random((512, 512))
    mag[mag < 0.98] = 0.0
    binmap = rng.integers(0, 4, (512, 512))
    xs = rng.integers(0, 512, 500)
    ys = rng.integers(0, 512, 500)
    print("descriptor_bins: 500 keypoints, 32x32 patches")
    b_nb = bench("numba", numba_impl.descriptor_bins,
                 (mag, binmap, xs, ys, 32, 4, 4), args.repeats)
    b_np = bench("numpy", numpy_impl.descriptor_bins,
                 (mag, binmap, xs, ys, 32, 4, 4), args.repeats)
    print(f"  speedup {b_np / b_nb:.1f}x")

    descs = rng.normal(size=(500, 64))
    cents = rng.normal(size=(256, 64))
    print("nearest_centroid: 500 descriptors x 256 centroids")
    b_nb = bench("numba", numba_impl.nearest_centroid, (descs, cents), args.repeats)
    b_np = bench("numpy", numpy_impl.nearest_centroid, (descs, cents), args.repeats)
    print(f"  speedup {b_np / b_nb:.1f}x")


if __name__ == "__main__":
    main()
