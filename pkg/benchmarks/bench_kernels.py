"""Timing of the numba kernels against the numpy/scipy fallbacks.

    python benchmarks/bench_kernels.py [--quick] [--repeat N]

Each kernel runs once untimed (compilation for numba), then ``repeat`` times;
the best time is reported along with a check that both backends agree.
"""
import argparse
import time

import numpy as np

from mhpnet import _accel
from mhpnet.geometry import MhpParams, Window, sample_ppp
from mhpnet.kernels import matern_keep, pair_counts


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick):
    radii = (1500.0, 4000.0) if quick else (1500.0, 4000.0, 10000.0)
    params = MhpParams.from_density(1e-5, 100.0)
    rng = np.random.default_rng(7)
    for radius in radii:
        pat = sample_ppp(params.lambda_p, Window(radius, 500.0), rng, tier="UAV")
        yield radius, pat, rng.random(len(pat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small windows only")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba not installed; nothing to compare")
        return 0
    edges = np.linspace(0.0, 300.0, 13)
    print(f"{'kernel':<12}{'radius_m':>10}{'points':>9}{'numba_ms':>11}{'numpy_ms':>11}{'speedup':>9}  agree")
    for radius, pat, marks in cases(args.quick):
        x, y = pat.x, pat.y
        centre = pat.inner_mask()
        jobs = {
            "matern_keep": lambda b: matern_keep(x, y, marks, 100.0, backend=b),
            "pair_counts": lambda b: pair_counts(x, y, centre, edges, backend=b),
        }
        for name, job in jobs.items():
            agree = np.array_equal(job("numba"), job("numpy"))
            t_nb = best_of(lambda: job("numba"), args.repeat)
            t_np = best_of(lambda: job("numpy"), args.repeat)
            print(f"{name:<12}{radius:>10.0f}{len(pat):>9d}{1e3 * t_nb:>11.2f}{1e3 * t_np:>11.2f}"
                  f"{t_np / t_nb:>9.2f}  {'yes' if agree else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
