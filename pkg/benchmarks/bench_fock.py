"""Time Fock-operator assembly with the compiled and the pure-Python kernel.

    python3 benchmarks/bench_fock.py [--repeat R]

Assembles a dense random quadratic-plus-quartic operator on several
(m, N) sectors with each available backend, checks that the matrices
agree, and prints the best-of-R wall time and the speedup.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from pairwave.focksector import _backend, enumerate_sector

CASES = [(3, 8), (4, 6), (4, 10), (5, 8), (6, 6)]


def random_blocks(m, rng):
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    C = rng.standard_normal((m,) * 4) + 1j * rng.standard_normal((m,) * 4)
    return A, C


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    names = _backend.available()
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(names)}")
    print(f"{'m':>3} {'N':>4} {'dim':>6} " + " ".join(f"{n + ' [s]':>14}" for n in names)
          + f" {'speedup':>9} {'max diff':>10}")
    for m, N in CASES:
        sec = enumerate_sector(m, N)
        A, C = random_blocks(m, rng)
        times, mats = [], []
        for name in names:
            t, H = best_time(lambda: sec.operator(A, C, backend=name), args.repeat)
            times.append(t)
            mats.append(H)
        diff = max(float(np.abs(H - mats[0]).max()) for H in mats)
        speed = times[-1] / times[0] if len(times) > 1 else 1.0
        print(f"{m:>3} {N:>4} {sec.dim:>6} " + " ".join(f"{t:>14.5f}" for t in times)
              + f" {speed:>8.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
