"""Numerical solution of the weak-coupling gap equation.

Solves  ln(Delta0/Delta) = 2 * integral_0^inf dx f(sqrt(x^2+Delta^2)/kT) / sqrt(x^2+Delta^2) * ...
in the standard reduced form: with d = Delta/Delta0, t = T/Tc and the BCS
ratio Delta0 = 1.764269... kB Tc (weak coupling), the finite-T gap obeys

    ln(1/d) = 2 * int_0^inf  1/(exp(sqrt(u^2 + r^2)) + 1) / sqrt(u^2 + r^2) du,
    r = d * (Delta0/(kB Tc)) / t

This pins the exact BCS Delta(T)/Delta0 that the tanh interpolation
approximates; the production code uses the interpolation only.

Run:  python3 tests/oracles/gap_equation_reference.py
"""

import math

from scipy.integrate import quad
from scipy.optimize import brentq


def gap_ratio(t_over_tc, ratio):
    """Solve for d = Delta(T)/Delta(0) at reduced temperature t."""
    if t_over_tc >= 1.0:
        return 0.0

    def rhs(d):
        r = d * ratio / t_over_tc

        def f(u):
            e = math.sqrt(u * u + r * r)
            if e > 700:
                return 0.0
            return 1.0 / ((math.exp(e) + 1.0) * e)

        val, _ = quad(f, 0, 60, limit=400)
        return 2.0 * val - math.log(1.0 / d)

    return brentq(rhs, 1e-8, 1.0 - 1e-12, xtol=1e-14)


def find_bcs_ratio():
    """Delta0/(kB Tc) such that the gap closes exactly at t=1."""
    # at t -> 1, d -> 0; expanding gives the textbook pi/e^euler value
    euler = 0.5772156649015329
    return math.pi / math.exp(euler)


def main():
    ratio = find_bcs_ratio()
    print(f"# weak-coupling ratio Delta0/(kB Tc) = pi/e^euler = {ratio:.12f}")
    for t in (0.2, 0.4, 0.5, 0.6, 0.8, 0.9, 0.95):
        d = gap_ratio(t, ratio)
        interp = math.tanh(1.74 * math.sqrt(1.0 / t - 1.0))
        print(f"t={t:4.2f}  gap_eq={d:.9f}  tanh_interp={interp:.9f}  "
              f"rel_diff={(interp - d) / d:+.4%}")


if __name__ == "__main__":
    main()
