"""Timing comparison of the compiled and pure-Python kernel backends.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are exercised on the two hot paths (thermal conductivity
ratios and the digamma series) with identical inputs; the script prints
per-call times and the speedup, and verifies the backends agree to
1e-12 relative before timing anything.
"""

import argparse
import time

import numpy as np

from spiralres.kernels import load_backend

SIGMA_CASES = [(wr, tr) for wr in (0.01, 0.05, 0.12, 0.25)
               for tr in (0.05, 0.15, 0.3, 0.5, 0.7)]
DIGAMMA_YS = np.geomspace(1e-3, 1e6, 500)


def check_agreement(fast, slow):
    worst = 0.0
    for wr, tr in SIGMA_CASES:
        a = fast.mb_sigma_ratios(wr, tr, 1e-10)
        b = slow.mb_sigma_ratios(wr, tr, 1e-10)
        for x, y in zip(a, b):
            if y != 0.0:
                worst = max(worst, abs(x / y - 1.0))
    for y in DIGAMMA_YS:
        a = fast.digamma_half_real(float(y))
        b = slow.digamma_half_real(float(y))
        worst = max(worst, abs(a - b) / max(abs(b), 1.0))
    return worst


def time_sigma(mod, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for wr, tr in SIGMA_CASES:
            mod.mb_sigma_ratios(wr, tr, 1e-9)
        best = min(best, time.perf_counter() - t0)
    return best / len(SIGMA_CASES)


def time_digamma(mod, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for y in DIGAMMA_YS:
            mod.digamma_half_real(float(y))
        best = min(best, time.perf_counter() - t0)
    return best / len(DIGAMMA_YS)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions; the best run counts")
    args = ap.parse_args()

    try:
        compiled = load_backend("compiled")
    except ImportError:
        print("compiled backend not importable; nothing to compare")
        return
    python = load_backend("python")

    worst = check_agreement(compiled, python)
    print(f"backend agreement: worst relative difference {worst:.2e}")
    assert worst < 1e-12, "backends disagree; timing would be meaningless"

    rows = [
        ("mb_sigma_ratios", time_sigma(compiled, args.repeat),
         time_sigma(python, args.repeat)),
        ("digamma_half_real", time_digamma(compiled, args.repeat),
         time_digamma(python, args.repeat)),
    ]
    print(f"{'kernel':<20} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for name, fast_t, slow_t in rows:
        print(f"{name:<20} {fast_t * 1e6:>10.1f}us {slow_t * 1e6:>10.1f}us "
              f"{slow_t / fast_t:>8.1f}x")


if __name__ == "__main__":
    main()
