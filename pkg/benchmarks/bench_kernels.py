"""Time the numba and numpy flavours of each kernel on the same inputs.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

The numba timings exclude the first (compiling) call. Outputs of the two
flavours are compared before timing so a speedup never hides a mismatch.
"""
import argparse
import time

import numpy as np

from divpath import kernels
from divpath._accel import USE_NUMBA


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(scale, rng):
    n_y, n_c, n_p = 50, int(120 * scale), int(800 * scale)
    rca = rng.lognormal(-0.3, 1.0, size=(n_y, n_c, n_p))
    bases = np.arange(4, n_y - 5, 2, dtype=np.int64)
    mask = kernels.jump_mask_np(rca, bases, 4, 4, 2, 1.0)
    bi, ci, pi = np.nonzero(mask)
    start = (bases[bi] + 2).astype(np.int64)
    m = (rng.random((n_c, n_p)) < 0.2).astype(np.uint8)
    phi = rng.random((n_p, n_p))
    phi = 0.5 * (phi + phi.T)
    values = rng.normal(size=(n_c, n_p))
    row_mask = rng.random((n_c, n_p)) < 0.7
    a = np.sort(rng.normal(size=200_000))
    b = np.sort(rng.normal(0.05, 1.0, size=150_000))
    return {
        "jump_mask": (rca, bases, 4, 4, 2, 1.0),
        "survival": (rca, start, ci.astype(np.int64), pi.astype(np.int64), 1.0),
        "max_basket_proximity": (m, phi),
        "masked_row_moments": (values, row_mask),
        "ks_statistic": (a, b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies country and product counts")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not USE_NUMBA:
        print("numba disabled (DIVPATH_DISABLE_NUMBA); timing numpy only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':22s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, inputs in cases(args.scale, rng).items():
        f_np = getattr(kernels, f"{name}_np")
        f_nb = getattr(kernels, f"{name}_nb")
        ref = f_np(*inputs)
        t_np = best_of(f_np, inputs, args.repeat)
        if USE_NUMBA:
            got = f_nb(*inputs)  # compiles
            for x, y in zip(np.atleast_1d(ref) if not isinstance(ref, tuple) else ref,
                            np.atleast_1d(got) if not isinstance(got, tuple) else got):
                np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12)
            t_nb = best_of(f_nb, inputs, args.repeat)
            print(f"{name:22s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:22s} {1e3 * t_np:12.2f} {'-':>12s} {'-':>8s}")


if __name__ == "__main__":
    main()
