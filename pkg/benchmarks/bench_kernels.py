"""Time the numpy and numba versions of every hot kernel, plus an end-to-end solve.

    python3 benchmarks/bench_kernels.py [--repeat N]

Kernel timings call both implementations in-process. The end-to-end timing
runs the solver in two subprocesses, one with FAIRSELECT_DISABLE_NUMBA=1, so
each uses its own backend for every kernel.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fairselect import _kernels as K

SOLVE_SNIPPET = """
import time
from fairselect import backend, solve
from fairselect.generators import generate
cases = [generate("p0", s) for s in range(8)] + [generate("pairwise", s) for s in range(4)]
solve(cases[0].instance, cases[0].fairness)  # warm-up (numba compile or cache load)
t = time.perf_counter()
for c in cases:
    solve(c.instance, c.fairness)
print(backend(), time.perf_counter() - t)
"""


def kernel_cases(rng):
    d = 7
    factor = np.linalg.qr(rng.normal(size=(d, d)))[0] * 3.0
    center = rng.normal(size=d)
    a = rng.normal(size=d)
    fvals = rng.uniform(size=4096)
    gvals = rng.uniform(size=(4096, 3))
    coeffs = rng.uniform(size=3)
    tableau = rng.normal(size=(40, 120))
    rev = np.sort(rng.uniform(1, 10, 64))[::-1].copy()
    nu = rng.uniform(0.2, 2.0, 64)
    cover = rng.random((32, 200)) < 0.1
    weights = rng.uniform(size=200)
    covered = rng.random(200) < 0.3
    return {
        "central_cut": ("central_cut", (center, factor, a)),
        "composite_argmax": ("composite_argmax", (fvals, gvals, coeffs)),
        "pivot": ("pivot", (tableau, 5, 17)),
        "mnl_best_prefix": ("mnl_best_prefix", (rev, nu, 1.0)),
        "coverage_gains": ("coverage_gains", (cover, weights, covered)),
    }


def time_kernels(repeat: int) -> None:
    if not K.HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numpy us':>12}{'numba us':>12}{'speed-up':>10}")
    for label, (name, args) in kernel_cases(rng).items():
        np_fn = getattr(K, f"np_{name}")
        t_np = min(timeit.repeat(lambda: np_fn(*args), number=200, repeat=repeat)) / 200 * 1e6
        if K.HAVE_NUMBA:
            nb_fn = getattr(K, f"nb_{name}")
            nb_fn(*args)  # compile outside the timed region
            t_nb = min(timeit.repeat(lambda: nb_fn(*args), number=200, repeat=repeat)) / 200 * 1e6
            print(f"{label:<18}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{label:<18}{t_np:>12.2f}{'n/a':>12}")


def time_end_to_end() -> None:
    for flag in ("0", "1"):
        env = dict(os.environ, FAIRSELECT_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, capture_output=True,
                             text=True, check=True)
        name, seconds = out.stdout.split()
        print(f"end-to-end solve of 12 instances, {name} backend: {float(seconds):.2f} s")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-solve", action="store_true")
    args = parser.parse_args()
    time_kernels(args.repeat)
    if not args.skip_solve:
        time_end_to_end()


if __name__ == "__main__":
    main()
