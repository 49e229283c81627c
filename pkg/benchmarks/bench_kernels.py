"""Timing comparison of the numba and numpy twins of the sector kernels.

The hot quadrature loops exist twice (see capwave._kernels): an njit
translation parallelized over output frequencies and a vectorized numpy
twin.  Dispatch reads the CAPWAVE_NUMBA environment flag per call, so one
process can steer the same workload through both paths.  A warmup call
keeps JIT compilation out of the numba timings (cache=True also persists
compiled code between runs).  The worst relative gap between the twin
results is printed next to the timings as a cross-check.

Usage:
    python3 benchmarks/bench_kernels.py [--scale 256] [--cubic-scale 64]
                                        [--repeats 3] [--cubic-repeats 1]
"""

import argparse
import os
import time

import numba

from capwave._kernels import numba_available
from capwave.data import SectorDatum
from capwave.dispersion import DispersionLaw
from capwave.iterates import QuadratureSpec, second_iterate, third_iterate

LAW = DispersionLaw(gravity=1.0, surface_tension=1.0)


def _run(order, datum, quad):
    fn = second_iterate if order == 2 else third_iterate
    return fn(LAW, datum, quad.time_cap, quad, "sector")


def _timed(order, datum, quad, repeats):
    best = float("inf")
    result = None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        result = _run(order, datum, quad)
        best = min(best, time.perf_counter() - t0)
    return best, result


def _twin_gap(a, b):
    return max(abs(a.sup_norms[k] / b.sup_norms[k] - 1.0) for k in a.sup_norms)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=256.0, help="second-iterate scale")
    parser.add_argument("--cubic-scale", type=float, default=64.0, help="third-iterate scale")
    parser.add_argument("--repeats", type=int, default=3, help="second-iterate repeats (best-of)")
    parser.add_argument("--cubic-repeats", type=int, default=1, help="third-iterate repeats")
    args = parser.parse_args(argv)

    jobs = (
        (
            f"second iterate 2d N={args.scale:g} s=1",
            2,
            SectorDatum(2, args.scale, args.scale**-0.1, 1.0),
            QuadratureSpec.for_scale(args.scale),
            args.repeats,
        ),
        (
            f"third iterate  2d N={args.cubic_scale:g} s=2",
            3,
            SectorDatum(2, args.cubic_scale, args.cubic_scale**-0.1, 2.0),
            QuadratureSpec.for_scale(args.cubic_scale),
            args.cubic_repeats,
        ),
    )

    print(f"numba {numba.__version__}, available: {numba_available()}")
    saved = os.environ.get("CAPWAVE_NUMBA")
    try:
        header = f"{'workload':<34} {'numpy':>9} {'numba':>9} {'speedup':>8} {'twin gap':>9}"
        print(header)
        print("-" * len(header))
        for name, order, datum, quad, repeats in jobs:
            os.environ["CAPWAVE_NUMBA"] = "0"
            t_np, res_np = _timed(order, datum, quad, repeats)
            if numba_available():
                os.environ["CAPWAVE_NUMBA"] = "1"
                _run(order, datum, quad)  # JIT warmup, not timed
                t_nb, res_nb = _timed(order, datum, quad, repeats)
                gap = _twin_gap(res_nb, res_np)
                print(
                    f"{name:<34} {t_np:>8.2f}s {t_nb:>8.2f}s {t_np / t_nb:>7.1f}x {gap:>9.1e}"
                )
            else:
                print(f"{name:<34} {t_np:>8.2f}s {'-':>9} {'-':>8} {'-':>9}")
    finally:
        if saved is None:
            os.environ.pop("CAPWAVE_NUMBA", None)
        else:
            os.environ["CAPWAVE_NUMBA"] = saved


if __name__ == "__main__":
    main()
