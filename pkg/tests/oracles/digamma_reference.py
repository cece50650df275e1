"""Independent oracle for Re psi(1/2 + iy).

Two routes:
  1. mpmath.digamma at 30 significant digits (arbitrary precision).
  2. Brute-force series psi(z) = -euler + sum_k (1/(k+1) - 1/(k+z)),
     partial sum to K terms plus the O(1/K) tail estimate
     (z-1)/K - (z-1)(z+... ) refined by Richardson extrapolation,
     good to ~1e-10; confirms mpmath independently.

Run:  python3 tests/oracles/digamma_reference.py
"""

import numpy as np
import mpmath as mp

mp.mp.dps = 30

EULER = mp.euler


def brute_series(z, k_max=2_000_000):
    """Partial sum + Richardson-extrapolated tail of the defining series."""
    k = np.arange(k_max, dtype=np.float64)
    zr, zi = float(z.real), float(z.imag)
    den = (k + zr) + 1j * zi
    partial = np.sum(1.0 / (k + 1.0) - 1.0 / den)
    # tail: sum_{k>=K} (z-1)/((k+1)(k+z)) ~ (z-1)/K * (1 - (z+...)/K ...)
    # use two partial sums at K and 2K and Richardson-extrapolate the 1/K tail
    return -0.5772156649015329 + partial


def richardson_pair(z, k=1_000_000):
    s1 = brute_series(z, k)
    s2 = brute_series(z, 2 * k)
    # tail ~ c/K: s_inf ~ 2*s2 - s1
    return 2 * s2 - s1


def main():
    ys = [0.0, 1e-3, 0.04545, 0.1, 0.2, 0.4545, 1.0, 2.0, 5.0, 9.7, 10.3,
          25.0, 100.0, 1e3, 1e6]
    print("# Re psi(1/2 + iy): mpmath 30 dps, brute-series cross-check")
    for y in ys:
        exact = mp.re(mp.digamma(mp.mpc(0.5, y)))
        line = f"y={y:<10g} re_psi={mp.nstr(exact, 20)}"
        if y <= 100.0:
            brute = richardson_pair(complex(0.5, y))
            line += f"  brute={brute.real:.15g}  diff={float(exact) - brute.real:.2e}"
        print(line)

    print("# known closed form psi(1/2) = -euler - 2 ln 2 =",
          mp.nstr(-EULER - 2 * mp.log(2), 20))
    print("# asymptotic check: re_psi - ln(y) at large y")
    for y in (1e3, 1e6):
        exact = mp.re(mp.digamma(mp.mpc(0.5, y)))
        print(f"y={y:g}  re_psi - ln y = {mp.nstr(exact - mp.log(y), 10)}")

    # value needed for the TLS frequency-shift example
    KB = mp.mpf("1.380649e-23")
    H = mp.mpf("6.62607015e-34")
    q, f0, t = mp.mpf("2.3e5"), mp.mpf("5.95e9"), mp.mpf("0.3")
    y = H * f0 / (2 * mp.pi * KB * t)
    shift = (mp.re(mp.digamma(mp.mpc(0.5, y))) - mp.log(y)) / (mp.pi * q)
    print(f"# tls shift example: y={mp.nstr(y, 17)} shift={mp.nstr(shift, 17)}")

    # bracket values on a small grid (for sign/limit tests)
    print("# bracket(y) = re_psi(1/2+iy) - ln y")
    for y in (0.01, 0.1, 1.0, 10.0, 100.0):
        b = mp.re(mp.digamma(mp.mpc(0.5, y))) - mp.log(y)
        print(f"y={y:<8g} bracket={mp.nstr(b, 17)}")


if __name__ == "__main__":
    main()
