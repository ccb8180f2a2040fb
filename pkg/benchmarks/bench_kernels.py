"""Compiled core versus numpy fallback on the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints wall time per call for each backend and the speedup.
"""
import argparse
import time

import numpy as np

from levyem import _fallback

try:
    from levyem import _core
except ImportError:
    _core = None


def _cases():
    A = np.zeros((1, 1))
    x0 = np.zeros(1)
    sim = (0, _fallback.KIND_PARETO, _fallback.DRIFT_OU, A, 0.0, x0, x0, 0.01, 200, 1.5, 0.02,
           7, 0, 1024, False, 1.0)
    iso = (0, _fallback.KIND_ISO, _fallback.DRIFT_OU_SINE, A, 0.5, np.zeros(3), np.zeros(3), 0.01, 100,
           1.5, 0.02, 7, 0, 1024, False, 1.0)
    return [
        ("philox_raw 1e6 blocks", "philox_raw", (1, 2, 0, 10**6)),
        ("draw_units cms 1e6", "draw_units", (_fallback.KIND_SYM1D, 1, 1.5, 1, 2, 0, 10**6)),
        ("draw_units isotropic d=3 2e5", "draw_units", (_fallback.KIND_ISO, 3, 1.5, 1, 2, 0, 2 * 10**5)),
        ("simulate_chunk pareto 1024x200", "simulate_chunk", sim),
        ("simulate_chunk iso d=3 1024x100", "simulate_chunk", iso),
        ("phim1_series 1e6", "phim1_series", (np.linspace(0, 1, 10**6), 1.5, 2.5)),
        ("log_pareto_product 1e6", "log_pareto_product", (0.9, 0.99999, 0, 10**6, 1.5, 2.5)),
    ]


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    print(f"{'kernel':34s} {'compiled':>10s} {'fallback':>10s} {'speedup':>8s}")
    for label, name, call in _cases():
        tf = _time(getattr(_fallback, name), call, args.repeat)
        if _core is None:
            print(f"{label:34s} {'-':>10s} {tf:10.4f} {'-':>8s}")
            continue
        tc = _time(getattr(_core, name), call, args.repeat)
        print(f"{label:34s} {tc:10.4f} {tf:10.4f} {tf / tc:7.1f}x")


if __name__ == "__main__":
    main()
