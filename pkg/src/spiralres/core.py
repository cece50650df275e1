"""Domain types shared by every module.

All quantities are SI; unit conversion happens only at the I/O boundary.
The types are immutable value objects, safe to share across threads.
Derived geometry fields are recomputed on every access so a stored copy
can never disagree with its defining fields.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CONST
from .errors import CurrentSheetAccuracyWarning, GeometryError


@dataclass(frozen=True)
class SpiralGeometry:
    """Planar spiral described by pitch, wire width, turns and inner diameter.

    Parameters
    ----------
    pitch : float
        Turn-to-turn period p in meters; p = wire width + gap.
    wire_width : float
        Conductor width w in meters; must satisfy 0 < w < p.
    turns : int
        Number of turns n, at least 1.
    inner_diameter : float
        Innermost diameter d_in in meters.
    """

    pitch: float
    wire_width: float
    turns: int
    inner_diameter: float

    @property
    def gap(self) -> float:
        """Turn-to-turn gap s = p - w."""
        return self.pitch - self.wire_width

    @property
    def outer_diameter(self) -> float:
        """d_out = d_in + 2 n p."""
        return self.inner_diameter + 2.0 * self.turns * self.pitch

    @property
    def fill_ratio(self) -> float:
        """rho = (d_out - d_in)/(d_out + d_in), in (0, 1)."""
        d_out = self.outer_diameter
        return (d_out - self.inner_diameter) / (d_out + self.inner_diameter)

    @property
    def average_diameter(self) -> float:
        """d_av = (d_in + d_out)/2."""
        return 0.5 * (self.inner_diameter + self.outer_diameter)

    @property
    def accuracy_warning(self) -> bool:
        """True when s > 3w, outside the current-sheet accuracy band."""
        return self.gap > 3.0 * self.wire_width


def validate_geometry(g: SpiralGeometry) -> SpiralGeometry:
    """Check structural constraints and return the geometry unchanged.

    Emits CurrentSheetAccuracyWarning when the gap-to-width ratio leaves
    the band where the inductance formula is accurate (s <= 3w).
    """
    for name in ("pitch", "wire_width", "inner_diameter"):
        v = getattr(g, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise GeometryError(f"{name} must be finite, got {v!r}")
    if g.pitch <= 0:
        raise GeometryError(f"pitch must be positive, got {g.pitch}")
    if g.inner_diameter <= 0:
        raise GeometryError(
            f"inner diameter must be positive, got {g.inner_diameter}")
    if not (isinstance(g.turns, (int, np.integer)) and g.turns >= 1):
        raise GeometryError(f"turns must be an integer >= 1, got {g.turns!r}")
    if not (0 < g.wire_width < g.pitch):
        raise GeometryError(
            f"wire width must satisfy 0 < w < p, got w={g.wire_width}, p={g.pitch}")
    if g.accuracy_warning:
        warnings.warn(
            f"gap {g.gap:.3e} m exceeds 3x wire width {g.wire_width:.3e} m; "
            "inductance error may exceed 8%",
            CurrentSheetAccuracyWarning,
            stacklevel=2,
        )
    return g


@dataclass(frozen=True)
class MaterialModel:
    """Superconducting film parameters entering the loss models.

    Parameters
    ----------
    tc : float
        Critical temperature in K.
    gap0 : float, optional
        Zero-temperature gap in J; defaults to 1.76 kB Tc.
    alpha : float
        Kinetic-inductance fraction L_k/(L_k + L_g), in [0, 1).
    gamma : float
        Film thickness/material exponent; -1 for thin films.
    eps_eff : float
        Effective dielectric constant seen by the spiral; the default is
        the silicon half-space average (11.7 + 1)/2.
    sigma_n : float
        Normal-state conductivity in S/m.  Only ratios to sigma_n enter
        any model, so the default of 1 is never wrong.
    """

    tc: float
    gap0: float = None  # type: ignore[assignment]
    alpha: float = 0.0
    gamma: float = -1.0
    eps_eff: float = 6.35
    sigma_n: float = 1.0

    def __post_init__(self):
        if not (self.tc > 0 and math.isfinite(self.tc)):
            raise ValueError(f"tc must be positive and finite, got {self.tc}")
        if self.gap0 is None:
            object.__setattr__(self, "gap0", 1.76 * CONST.kB * self.tc)
        if not (self.gap0 > 0):
            raise ValueError(f"gap0 must be positive, got {self.gap0}")
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.eps_eff > 1.0):
            raise ValueError(f"eps_eff must exceed 1, got {self.eps_eff}")


@dataclass(frozen=True)
class ComplexSpectrum:
    """Frequency-indexed complex reflection samples.

    frequencies must be strictly increasing and finite; values are the
    complex reflection coefficients on the same grid.  Power metadata is
    carried through so photon numbers can be computed after fitting.
    """

    frequencies: np.ndarray
    values: np.ndarray
    drive_power_dbm: float | None = None
    attenuation_db: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)
        if f.ndim != 1 or v.shape != f.shape:
            raise ValueError("frequencies and values must be 1-D and equal length")
        if not np.all(np.isfinite(f)):
            raise ValueError("non-finite frequency sample")
        if not np.all(np.isfinite(v.real) & np.isfinite(v.imag)):
            raise ValueError("non-finite reflection sample")
        if len(f) > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")

    def __len__(self):
        return len(self.frequencies)


#: minimum number of samples for any trace fit
MIN_FIT_SAMPLES = 16


@dataclass(frozen=True)
class FitResult:
    """Outcome of a nonlinear least-squares fit.

    params maps names to values; covariance rows/columns follow the same
    order as param_names.  residual_norm is the final weighted sum of
    squared residuals.  A parameter whose residual dependence vanished
    gets an infinite variance and flips ill_conditioned.
    """

    param_names: tuple
    values: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    dof: int
    converged: bool
    iterations: int
    ill_conditioned: bool = False
    message: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "covariance", cov)
        k = len(self.param_names)
        if vals.shape != (k,) or cov.shape != (k, k):
            raise ValueError("covariance/values shape must match param_names")
        diag = np.diag(cov)
        if np.any(diag[np.isfinite(diag)] < -1e-300):
            raise ValueError("covariance diagonal must be non-negative")

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.param_names.index(name)])

    def stderr(self, name: str) -> float:
        """1-sigma uncertainty of a named parameter."""
        i = self.param_names.index(name)
        var = self.covariance[i, i]
        return float(math.sqrt(var)) if var >= 0 else float("inf")

    @property
    def params(self) -> dict:
        return {n: float(v) for n, v in zip(self.param_names, self.values)}
