"""Compare the compiled and pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

The kernel timings call both implementations directly. The end-to-end timing
runs the full estimator in a subprocess per backend, since the backend is
chosen at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from lmm import _kernels_py

try:
    from lmm import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import time, lmm
d = lmm.make_distribution("zipf", {S}, s=1.0)
t0 = time.perf_counter()
for t in range({trials}):
    rng = lmm.trial_rng(0, t)
    lmm.lmm_estimate(lmm.draw_poissonized(d, {n}, rng), lmm.LmmConfig(), rng)
print(lmm.BACKEND, (time.perf_counter() - t0) / {trials})
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    m, N = 9, 600
    A = rng.normal(size=(m, N))
    b = A @ rng.random(N)
    A[b < 0] *= -1
    b = np.abs(b)
    p = rng.integers(0, 40, size=20_000) / 1000.0
    cases = {
        "phase1_simplex 9x600": lambda k: k.phase1_simplex(A, b, 10_000),
        "falling_factorial_sums 20000x8": lambda k: k.falling_factorial_sums(p, 1000.0, 8),
    }
    for name, call in cases.items():
        py = best(lambda: call(_kernels_py), repeat)
        cy = best(lambda: call(_kernels), repeat) if _kernels else float("nan")
        yield name, py, cy


def end_to_end(S, n, trials):
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, LMM_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", END_TO_END.format(S=S, n=n, trials=trials)],
                             env=env, capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out[backend] = float(secs)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--S", type=int, default=2000)
    ap.add_argument("--n", type=float, default=4000)
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the pure-Python column is meaningful")
    print(f"{'kernel':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, py, cy in kernel_rows(args.repeat):
        print(f"{name:34s} {py * 1e3:12.3f} {cy * 1e3:12.3f} {py / cy:8.1f}")
    e2e = end_to_end(args.S, args.n, args.trials)
    py, cy = e2e.get("python", float("nan")), e2e.get("cython", float("nan"))
    label = f"lmm_estimate zipf S={args.S} n={args.n:g}"
    print(f"{label:34s} {py * 1e3:12.1f} {cy * 1e3:12.1f} {py / cy:8.1f}")


if __name__ == "__main__":
    main()
