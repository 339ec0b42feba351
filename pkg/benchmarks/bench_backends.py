"""Benchmark the compiled kernels against the pure-Python reference.

Both backends draw from the same streams and produce bit-identical output
(see tests/test_backend_parity.py); this script measures the speed gap on
the hot kernels.  Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import math
import time

import numpy as np

from stable_exit.backend import HAVE_COMPILED, get_backend
from stable_exit.rng import RngStream


def timeit(fn):
    t0 = time.perf_counter()
    out = fn()
    return time.perf_counter() - t0, out


def bench(name, make_args, runner, n_pure, n_comp):
    pure = get_backend("pure")
    comp = get_backend("compiled")
    t_pure, _ = timeit(lambda: runner(pure, make_args(0), n_pure))
    t_comp, _ = timeit(lambda: runner(comp, make_args(1), n_comp))
    per_pure = t_pure / n_pure * 1e6
    per_comp = t_comp / n_comp * 1e6
    print(f"{name:<28} {per_pure:>12.2f} {per_comp:>12.2f} {per_pure / per_comp:>9.0f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    if not HAVE_COMPILED:
        raise SystemExit("compiled backend not built; nothing to compare")

    scale = 10 if args.quick else 1
    kappa = 2.0 / math.pi
    slice_params = np.array([0.5, 1.0, 0.0, 8.0])
    region_params = np.array([0.5, 1.0])

    print(f"{'kernel':<28} {'pure us/it':>12} {'compiled us/it':>12} {'speedup':>9}")

    bench("sym_stable draw",
          lambda sid: RngStream(1, sid).bit_generator(),
          lambda k, bg, n: k.sym_stable_batch(bg, 1.0, n),
          20_000 // scale, 2_000_000 // scale)
    bench("positive_stable draw",
          lambda sid: RngStream(2, sid).bit_generator(),
          lambda k, bg, n: k.positive_stable_batch(bg, 0.5, n),
          20_000 // scale, 2_000_000 // scale)
    bench("isotropic increment (d=2)",
          lambda sid: RngStream(3, sid).bit_generator(),
          lambda k, bg, n: k.isotropic_increment_batch(bg, 2, 1.0, 1.0, n),
          10_000 // scale, 1_000_000 // scale)
    bench("ball-exit draw (d=2)",
          lambda sid: RngStream(4, sid).bit_generator(),
          lambda k, bg, n: k.ball_exit_batch(bg, 2, 1.0, 1.0, n),
          10_000 // scale, 1_000_000 // scale)
    bench("parabola distance",
          lambda sid: None,
          lambda k, _, n: [k.parabola_profile_distance(0.5, 1.0, 4.0, 1.1)
                           for _ in range(n)],
          2_000 // scale, 200_000 // scale)
    bench("walk-on-balls (slice walk)",
          lambda sid: RngStream(5, sid).bit_generator(),
          lambda k, bg, n: k.wob_batch(bg, 1, slice_params,
                                       np.array([4.0, 0.0]), 1.0, 1.0, 10**5, n,
                                       kappa),
          300 // scale or 1, 100_000 // scale)
    bench("euler exit walk (h=0.01)",
          lambda sid: RngStream(6, sid).bit_generator(),
          lambda k, bg, n: k.euler_batch(bg, 0, region_params,
                                         np.array([2.0, 0.0]), 1.0, 0.01, 1e4, n),
          30 // scale or 1, 20_000 // scale)


if __name__ == "__main__":
    main()
