"""Time the compiled and numpy variance kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Prints per-point times, the speed-up and the largest relative deviation
between the two backends.
"""
import argparse
import math
import timeit

import numpy as np

from casimir_fluct import kernels


def bench(fn, repeat):
    # best of `repeat`, one call each
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="points per call")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--z-over-lambda", type=float, default=1.0)
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled kernels not available; only the numpy backend can be timed")
    z = 2 * math.pi * args.z_over_lambda
    mu = 1.0 / z
    u = np.random.default_rng(0).random((args.n, 9))
    cases = {
        "single": (lambda b: kernels.single_samples(u[:, :7], z, min(1.0, mu), mu, backend=b)),
        "double": (lambda b: kernels.double_samples(u, z, mu, mu, 0, 0, backend=b)),
    }
    backends = ["numpy"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"{'kernel':<8}{'backend':<9}{'us/point':>10}{'speed-up':>10}{'max rel dev':>13}")
    for name, fn in cases.items():
        ref = fn("numpy")
        t_np = bench(lambda: fn("numpy"), args.repeat)
        print(f"{name:<8}{'numpy':<9}{1e6 * t_np / args.n:>10.3f}{1.0:>10.2f}{0.0:>13.1e}")
        if "cython" in backends:
            out = fn("cython")
            dev = float(np.max(np.abs(out - ref)) / np.max(np.abs(ref)))
            t_cy = bench(lambda: fn("cython"), args.repeat)
            print(f"{name:<8}{'cython':<9}{1e6 * t_cy / args.n:>10.3f}{t_np / t_cy:>10.2f}{dev:>13.1e}")


if __name__ == "__main__":
    main()
