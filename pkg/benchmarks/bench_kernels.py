#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Runs each hot kernel on pipeline-shaped inputs (124x132 working frames,
60-frame median window) and prints per-call times plus speedups.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import time

import numpy as np

from smokescan.kernels import HAVE_COMPILED, fallback

if HAVE_COMPILED:
    from smokescan.kernels import _core


def time_call(fn, *args, repeat=20):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    h, w = 132, 124
    stack = rng.random((60, h, w, 3))
    mask = (rng.random((h, w)) > 0.6).astype(np.uint8)
    image = rng.random((h, w))
    dog_kernel = rng.standard_normal((1, 13, 13))
    laws_bank = rng.standard_normal((25, 5, 5))

    cases = [
        ("median_stack 60x132x124x3", "median_stack", (stack,)),
        ("box_count r=4 132x124", "box_count", (mask, 4)),
        ("conv2d_bank DoG 13x13", "conv2d_bank", (image, dog_kernel)),
        ("conv2d_bank 25 Laws masks", "conv2d_bank", (image, laws_bank)),
        ("clahe_channel 8x8 tiles", "clahe_channel", (image, 8, 8, 0.02, 256)),
    ]

    print(f"compiled extension available: {HAVE_COMPILED}")
    print(f"{'kernel':<30} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for label, name, call_args in cases:
        numpy_t = time_call(getattr(fallback, name), *call_args, repeat=args.repeat)
        if HAVE_COMPILED:
            core_t = time_call(getattr(_core, name), *call_args, repeat=args.repeat)
            ratio = numpy_t / core_t if core_t > 0 else float("inf")
            print(f"{label:<30} {numpy_t*1e3:>8.2f}ms {core_t*1e3:>8.2f}ms {ratio:>7.2f}x")
        else:
            print(f"{label:<30} {numpy_t*1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
