"""Timing comparison of the jitted kernels against the vectorized numpy
fallback (the path selected at import time by BOHM_NO_NUMBA=1).

Both implementations are bit-identical by construction; this script measures
the speed gap on the two hot loops: RK4 trajectory advection through velocity
frames, and velocity-Verlet ensemble integration.

Usage: python3 benchmarks/bench_kernels.py [--samples N] [--repeat K]
"""

import argparse
import time

import numpy as np

from bohmstat import kernels


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_rk4(samples, repeat):
    rng = np.random.default_rng(0)
    n, nframes, d = 256, 51, 1
    lo, hi = -16.0, 16.0
    dx = (hi - lo) / n
    x_first = lo
    times = np.linspace(0.0, 1.0, nframes)
    vflat = rng.standard_normal((nframes, d, n)) * 0.3
    x0 = rng.uniform(lo, hi, (samples, d))
    args = (times, vflat, x_first, dx, n, True, 2, lo, hi)

    def numba_path():
        return kernels._rk4_paths_numba(x0.copy(), *args)[0]

    def numpy_path():
        return kernels._rk4_paths_numpy(x0.copy(), *args)[0]

    if kernels.NUMBA_ENABLED:
        numba_path()  # compile outside the timed region
    t_numba, p1 = _time(numba_path, repeat)
    t_numpy, p2 = _time(numpy_path, repeat)
    assert np.array_equal(p1, p2), "kernel paths diverged"
    return t_numba, t_numpy


def bench_verlet(samples, repeat):
    rng = np.random.default_rng(1)
    n_part = 8
    x0 = rng.standard_normal((samples, n_part))
    p0 = rng.standard_normal((samples, n_part))
    masses = np.ones(n_part)
    omegas = np.ones(n_part)

    def run():
        return kernels.verlet(x0, p0, masses, omegas, 0.3, 1e-3, 2000, 200)

    if kernels.NUMBA_ENABLED:
        run()
    t_on, _ = _time(run, repeat)
    # the numpy fallback is reachable directly regardless of the flag
    def run_numpy():
        return kernels._verlet_numpy(x0.copy(), p0.copy(), masses, omegas,
                                     0.3, 1e-3, 2000, 200)

    t_off, _ = _time(run_numpy, repeat)
    return t_on, t_off


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mode = "numba" if kernels.NUMBA_ENABLED else "numpy (BOHM_NO_NUMBA set)"
    print(f"kernel mode: {mode}")
    t_nb, t_np = bench_rk4(args.samples, args.repeat)
    print(f"rk4_paths   {args.samples} samples x 51 frames: "
          f"jit {t_nb*1e3:8.1f} ms   numpy {t_np*1e3:8.1f} ms   "
          f"speedup {t_np/t_nb:5.2f}x")
    t_nb, t_np = bench_verlet(args.samples, args.repeat)
    print(f"verlet      {args.samples} samples x 2000 steps: "
          f"jit {t_nb*1e3:8.1f} ms   numpy {t_np*1e3:8.1f} ms   "
          f"speedup {t_np/t_nb:5.2f}x")


if __name__ == "__main__":
    main()
