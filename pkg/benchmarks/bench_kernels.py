"""Compare the numba and numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
warmed up once (numba compiles on first call), then timed as the best of
``--repeat`` runs on inputs shaped like the ones the library produces.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cograte import kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    a = rng.uniform(1.0, 100.0, 200_000)
    x = rng.uniform(0.0, 200.0, 200_000)
    g = np.geomspace(1e-9, 1e6, 200_000)
    comps = [rng.standard_normal((50_000, 10)) for _ in range(4)]
    z = rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)
    return {
        "gammainc_lower (2e5)": lambda b: b.gammainc_lower(a, x, 1e-15, 500),
        "e1_scaled (2e5)": lambda b: b.e1_scaled(g, 1e-15, 500),
        "expected_log (2e5)": lambda b: b.expected_log(g, 1e-8, 1e-15, 500),
        "energy_pair (5e4 x 10)": lambda b: b.energy_pair(*comps),
        "ar1_recursion (1e6)": lambda b: b.ar1_recursion(z, 0.99, 0.0),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if kernels.numba_backend is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, fn in cases(rng).items():
        t_np = best_of(lambda: fn(kernels.numpy_backend), args.repeat)
        t_nb = best_of(lambda: fn(kernels.numba_backend), args.repeat)
        print(f"{name:<26}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
