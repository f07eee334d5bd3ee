"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Compile time is excluded: every kernel is called once before timing.
"""

import argparse
import time

import numpy as np

from gradflow import _kernels
from gradflow.analyzer import scan_grid
from gradflow.models import FH_CLIP
from gradflow.scalarfun import coefficient_arrays
from gradflow.tableau import registry_get


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    z = scan_grid()
    ahat, _ = coefficient_arrays(registry_get("Kutta4"), "N", z)
    ahat = np.ascontiguousarray(ahat)
    S = rng.standard_normal((z.size, 4, 4))
    S = np.ascontiguousarray(S + S.transpose(0, 2, 1))
    u1 = rng.uniform(-1, 1, 1 << 20)
    u2 = rng.uniform(-1, 1, (512, 512))
    return {
        "diff_matrices (1e4 x 4x4)": lambda k: k.diff_matrices(ahat, z),
        "leading_minors (1e4 x 4x4)": lambda k: k.leading_minors(S),
        "double_well (2^20)": lambda k: k.double_well(u1, 4.0),
        "flory_huggins (512^2)": lambda k: k.flory_huggins(u2, 0.8, 1.0, 4.0, FH_CLIP),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, call in cases().items():
        t_np = best_of(lambda: call(_kernels.numpy_kernels), args.repeat)
        t_nb = best_of(lambda: call(_kernels.numba_kernels), args.repeat)
        print(f"{name:28s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
