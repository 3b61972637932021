#!/usr/bin/env python3
"""Throughput comparison of the two kernel paths (numba vs numpy).

The kernel path is chosen at import time from FRIMAP_KERNELS, so this
script re-executes itself once per path and prints a combined table:

    python3 bench/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np

SHAPES = {
    # scan workhorse: conv2 of the classic net, batch of regions
    "conv 16x(15,15,64)->64": ("conv", (16, 15, 15, 64), 64),
    # probe workhorse: stride-1 conv2 on the full 32px canvas
    "conv 16x(32,32,64)->64": ("conv", (16, 32, 32, 64), 64),
    "maxpool 64x(32,32,64) s3/2": ("pool", (64, 32, 32, 64), None),
    "lrn 64x(15,15,64)": ("lrn", (64, 15, 15, 64), None),
    "resize 256->32": ("resize", (256, 256, 3), None),
    "fc 64x(3136->192)": ("fc", (64, 3136), 192),
}


def run_one(name, reps=3):
    from frimap import kernels

    kind, shape, extra = SHAPES[name]
    rng = np.random.default_rng(0)
    if kind == "conv":
        x = rng.standard_normal(shape).astype(np.float32)
        k = rng.standard_normal((5, 5, shape[3], extra)).astype(np.float32)
        b = np.zeros(extra, dtype=np.float32)
        fn = lambda: kernels.conv2d_same_batch(x, k, b)
        flops = 2 * np.prod(shape[:3]) * extra * 25 * shape[3]
    elif kind == "pool":
        x = rng.standard_normal(shape).astype(np.float32)
        fn = lambda: kernels.maxpool_batch(x, 3, 2)
        flops = np.prod(shape) * 9
    elif kind == "lrn":
        x = rng.standard_normal(shape).astype(np.float32)
        fn = lambda: kernels.lrn_batch(x, 4, 1.0, 0.001 / 9, 0.75)
        flops = np.prod(shape) * 18
    elif kind == "resize":
        x = rng.integers(0, 256, shape, dtype=np.uint8)
        fn = lambda: kernels.resize_bilinear_u8(x, 32, 32)
        flops = 32 * 32 * shape[2] * 8
    else:
        x = rng.standard_normal(shape).astype(np.float32)
        w = rng.standard_normal((shape[1], extra)).astype(np.float32)
        b = np.zeros(extra, dtype=np.float32)
        fn = lambda: kernels.matmul_bias(x, w, b)
        flops = 2 * shape[0] * shape[1] * extra
    fn()  # warm up / JIT
    best = min(_timed(fn) for _ in range(reps))
    return best, float(flops) / best / 1e9


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def child(path):
    os.environ["FRIMAP_KERNELS"] = path
    from frimap import kernels

    rows = {}
    for name in SHAPES:
        secs, gflops = run_one(name)
        rows[name] = (secs, gflops)
    print(json.dumps({"backend": kernels.backend_name, "rows": rows}))


def main():
    if len(sys.argv) > 1:
        child(sys.argv[1])
        return
    results = {}
    for path in ("numba", "numpy"):
        out = subprocess.run(
            [sys.executable, __file__, path], capture_output=True, text=True,
            env={**os.environ, "FRIMAP_KERNELS": path})
        if out.returncode != 0:
            print(out.stderr, file=sys.stderr)
            raise SystemExit(f"benchmark child for {path} failed")
        results[path] = json.loads(out.stdout.splitlines()[-1])["rows"]

    width = max(len(n) for n in SHAPES) + 2
    print(f"{'kernel':<{width}} {'numba':>14} {'numpy':>14}  ratio")
    for name in SHAPES:
        nb_s, nb_g = results["numba"][name]
        np_s, np_g = results["numpy"][name]
        ratio = np_s / nb_s if nb_s else float("inf")
        print(f"{name:<{width}} {nb_s * 1e3:>9.2f} ms {np_s * 1e3:>9.2f} ms "
              f" {ratio:>5.2f}x  ({nb_g:.1f} / {np_g:.1f} GFLOP/s)")


if __name__ == "__main__":
    main()
