"""Time the numba kernels against their pure-numpy references.

Both code paths live in semicascade._kernels regardless of the
SEMICASCADE_NO_NUMBA switch, so one process can time them side by side.
Workloads mirror the real call sites: orbit sweeps feeding Birkhoff
averages and the all-pairs circle scan feeding the proximality graph.

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from semicascade import _kernels as k

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
REPEATS = 5


def best_of(fn, *args):
    fn(*args)  # warm-up; first numba call compiles
    times = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    rng = np.random.default_rng(0)
    x1 = rng.random(256)
    x2 = rng.random((256, 2))
    xp = rng.random(100)

    cases = [
        ("orbit_batch_1d rotation P=256 n=4096",
         k.orbit_batch_1d_numpy, k.orbit_batch_1d_numba,
         (k.ROTATION, GOLDEN, x1, 4096)),
        ("orbit_batch_1d doubling P=256 n=4096",
         k.orbit_batch_1d_numpy, k.orbit_batch_1d_numba,
         (k.DOUBLING, 0.0, x1, 4096)),
        ("orbit_batch_2d cat P=256 n=2048",
         k.orbit_batch_2d_numpy, k.orbit_batch_2d_numba,
         (2.0, 1.0, 1.0, 1.0, x2, 2048)),
        ("pairwise_min_circle rotation P=100 n=10000",
         k.pairwise_min_circle_numpy, k.pairwise_min_circle_numba,
         (k.ROTATION, GOLDEN, xp, 10_000)),
    ]

    if not k.HAVE_NUMBA:
        print("numba is not importable; only the numpy path is timed")

    print("%-44s %10s %10s %8s %10s" % ("kernel", "numpy", "numba",
                                        "speedup", "max|diff|"))
    for name, fn_np, fn_nb, args in cases:
        t_np, out_np = best_of(fn_np, *args)
        if k.HAVE_NUMBA:
            t_nb, out_nb = best_of(fn_nb, *args)
            diff = float(np.max(np.abs(out_np - out_nb)))
            print("%-44s %9.4fs %9.4fs %7.1fx %10.1e"
                  % (name, t_np, t_nb, t_np / t_nb, diff))
        else:
            print("%-44s %9.4fs %10s %8s %10s" % (name, t_np, "-", "-", "-"))


if __name__ == "__main__":
    main()
