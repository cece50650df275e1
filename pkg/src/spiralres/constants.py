"""Physical constants (CODATA 2018) used throughout the package.

All internal arithmetic is SI.  The values are pinned here rather than
taken from an external table so the numerical contract of the test
suite cannot drift with library upgrades.
"""

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 exact/recommended values, immutable after import."""

    mu0: float = 1.25663706212e-6      # vacuum permeability, H/m
    c0: float = 299792458.0            # speed of light, m/s (exact)
    kB: float = 1.380649e-23           # Boltzmann constant, J/K (exact)
    h: float = 6.62607015e-34          # Planck constant, J s (exact)
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)   # reduced Planck, J s
    muB: float = 9.2740100783e-24      # Bohr magneton, J/T
    euler_gamma: float = 0.5772156649015329   # Euler-Mascheroni


CONST = PhysicalConstants()
