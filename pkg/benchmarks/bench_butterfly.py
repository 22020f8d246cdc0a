#!/usr/bin/env python3
"""Benchmark the pair-rotation kernel: compiled extension vs numpy fallback.

The layered transform is the per-run hot spot of the simulator (one apply
per side over the 2k-mode interleaved vector), so the kernel is compiled
when possible.  Both kernels must produce bit-identical output; this
script verifies that on every benchmarked size and reports the speedup.

Usage: python benchmarks/bench_butterfly.py [--dims 4096,65536] [--repeats 20]
"""
import argparse
import time

import numpy as np

from dmcvqkd import _butterfly_py
from dmcvqkd.rotations import OrthogonalTransform, kernel_name

try:
    from dmcvqkd import _butterfly

    KERNELS = [("compiled", _butterfly.rotate_pairs),
               ("fallback", _butterfly_py.rotate_pairs)]
except ImportError:
    KERNELS = [("fallback", _butterfly_py.rotate_pairs)]


def apply_with(kernel, transform, v):
    out = v.copy()
    for lay in transform.layers:
        kernel(out, lay.lo, lay.hi, lay.cos, lay.sin)
    return out


def bench(dim: int, repeats: int, seed: int):
    rng = np.random.default_rng(seed)
    transform = OrthogonalTransform.random(dim, seed=(seed, dim))
    v = rng.normal(size=dim)

    results = {}
    outputs = {}
    for name, kernel in KERNELS:
        apply_with(kernel, transform, v)  # warm up
        t0 = time.perf_counter()
        for _ in range(repeats):
            out = apply_with(kernel, transform, v)
        dt = (time.perf_counter() - t0) / repeats
        results[name] = dt
        outputs[name] = out

    identical = True
    if len(outputs) == 2:
        identical = bool(np.array_equal(outputs["compiled"],
                                        outputs["fallback"]))
    return results, identical


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="4096,40000,262144",
                    help="comma-separated vector lengths")
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print(f"active kernel: {kernel_name()}")
    header = f"{'dim':>9}  {'compiled':>12}  {'fallback':>12}  " \
             f"{'speedup':>8}  bit-identical"
    print(header)
    print("-" * len(header))
    ok = True
    for dim_s in args.dims.split(","):
        dim = int(dim_s)
        results, identical = bench(dim, args.repeats, args.seed)
        ok = ok and identical
        comp = results.get("compiled")
        fall = results["fallback"]
        comp_s = f"{comp * 1e3:9.3f} ms" if comp else "        n/a"
        speed = f"{fall / comp:7.2f}x" if comp else "     n/a"
        print(f"{dim:>9}  {comp_s:>12}  {fall * 1e3:9.3f} ms  "
              f"{speed:>8}  {identical}")
    if not ok:
        raise SystemExit("kernel outputs differ")


if __name__ == "__main__":
    main()
