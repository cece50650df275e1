"""Forward design equations for planar spiral resonators.

Geometric inductance comes from the current-sheet approximation

    L_g = (mu0 n^2 d_av / 2) (ln(2.5/rho) + 0.2 rho^2)

and the fundamental resonance of the open spiral from

    f_g = xi (c0/sqrt(eps_eff)) 2p / (pi (d_in + 2 n p)^2),  xi = 0.81.

The inverse solver reconstructs integer turn counts (and optionally the
inner diameter) from target frequency/impedance.  The shape constant xi
is fixed: it is a property of the planar spiral family, not a fit knob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CONST
from .core import MaterialModel, SpiralGeometry, validate_geometry
from .errors import GeometryError

XI_SHAPE = 0.81


@dataclass(frozen=True)
class DesignResult:
    """Forward-design outputs for one geometry/material pair (SI units)."""

    geometry: SpiralGeometry
    lg: float            # geometric inductance, H
    fg: float            # designed fundamental, Hz
    zc: float            # characteristic impedance, Ohm
    lk: float            # kinetic inductance implied by alpha, H
    f0_predicted: float  # fg sqrt(Lg/(Lk+Lg)), Hz
    fg_miss: float = 0.0  # relative miss of a solver target, 0 for forward runs


def geometric_inductance(g: SpiralGeometry) -> float:
    """Current-sheet inductance L_g in henries."""
    rho = g.fill_ratio
    if not (0.0 < rho < 1.0):
        raise GeometryError(f"fill ratio must lie in (0, 1), got {rho}")
    return (CONST.mu0 * g.turns**2 * g.average_diameter / 2.0
            * (math.log(2.5 / rho) + 0.2 * rho * rho))


def fundamental_frequency(g: SpiralGeometry, m: MaterialModel) -> float:
    """Designed (purely geometric) fundamental resonance f_g in Hz."""
    if not (m.eps_eff > 1.0):
        raise ValueError(f"eps_eff must exceed 1, got {m.eps_eff}")
    d_out = g.inner_diameter + 2.0 * g.turns * g.pitch
    return (XI_SHAPE * (CONST.c0 / math.sqrt(m.eps_eff))
            * 2.0 * g.pitch / (math.pi * d_out * d_out))


def characteristic_impedance(lg: float, fg: float) -> float:
    """Z_c = 2 pi f_g L_g in ohms."""
    if lg < 0 or fg < 0:
        raise ValueError("inductance and frequency must be non-negative")
    return 2.0 * math.pi * fg * lg


def predict_loaded_frequency(fg: float, lg: float, lk: float) -> float:
    """Kinetic-inductance-loaded resonance f0 = f_g sqrt(Lg/(Lk+Lg))."""
    if lg <= 0 or lk < 0:
        raise ValueError("need Lg > 0 and Lk >= 0")
    return fg * math.sqrt(lg / (lk + lg))


def estimate_design_frequency(f0: float, alpha: float) -> float:
    """Invert the loading: f_g estimate = f0 / sqrt(1 - alpha)."""
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return f0 / math.sqrt(1.0 - alpha)


def kinetic_from_alpha(alpha: float, lg: float) -> float:
    """Kinetic inductance L_k = Lg alpha/(1 - alpha)."""
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return lg * alpha / (1.0 - alpha)


def design_summary(g: SpiralGeometry, m: MaterialModel) -> DesignResult:
    """Forward evaluation of every design quantity for a geometry."""
    g = validate_geometry(g)
    lg = geometric_inductance(g)
    fg = fundamental_frequency(g, m)
    lk = kinetic_from_alpha(m.alpha, lg)
    return DesignResult(
        geometry=g,
        lg=lg,
        fg=fg,
        zc=characteristic_impedance(lg, fg),
        lk=lk,
        f0_predicted=predict_loaded_frequency(fg, lg, lk),
    )


def _outer_diameter_for(target_fg: float, pitch: float, eps_eff: float) -> float:
    """Closed-form d_out that lands the fundamental on target_fg."""
    num = XI_SHAPE * (CONST.c0 / math.sqrt(eps_eff)) * 2.0 * pitch
    return math.sqrt(num / (math.pi * target_fg))


def solve_geometry(target_fg: float, pitch: float, wire_width: float,
                   inner_diameter: float, m: MaterialModel,
                   max_turns: int = 10**6) -> tuple[SpiralGeometry, float]:
    """Pick the integer turn count whose fundamental is closest to target.

    Returns (geometry, relative_miss).  Fails when no turn count within
    [1, max_turns] lands inside 20% of the target.
    """
    if not (1e8 < target_fg < 5e10):
        raise ValueError(f"target frequency out of range (0.1-50 GHz): {target_fg}")
    d_out = _outer_diameter_for(target_fg, pitch, m.eps_eff)
    n_real = (d_out - inner_diameter) / (2.0 * pitch)
    best = None
    for n in {max(1, math.floor(n_real)), max(1, math.ceil(n_real))}:
        if n > max_turns:
            continue
        g = SpiralGeometry(pitch=pitch, wire_width=wire_width,
                           turns=int(n), inner_diameter=inner_diameter)
        fg = fundamental_frequency(g, m)
        miss = abs(fg - target_fg) / target_fg
        if best is None or miss < best[1]:
            best = (g, miss)
    if best is None or best[1] > 0.20:
        raise GeometryError(
            f"no turn count in [1, {max_turns}] reaches within 20% of "
            f"{target_fg:.4g} Hz for p={pitch:.3g} m, d_in={inner_diameter:.3g} m")
    return best


def solve_geometry_joint(target_fg: float, target_lg: float, pitch: float,
                         wire_width: float, m: MaterialModel,
                         min_inner: float = 5e-7) -> tuple[SpiralGeometry, float]:
    """Reconstruct (n, d_in) hitting target_fg exactly and target_lg best.

    The fundamental pins the outer diameter in closed form; scanning the
    integer turn count then trades inner diameter against inductance.
    Returns (geometry, relative_lg_miss).
    """
    d_out = _outer_diameter_for(target_fg, pitch, m.eps_eff)
    best = None
    n = 1
    while True:
        d_in = d_out - 2.0 * n * pitch
        if d_in < min_inner:
            break
        g = SpiralGeometry(pitch=pitch, wire_width=wire_width,
                           turns=n, inner_diameter=d_in)
        miss = abs(geometric_inductance(g) - target_lg) / target_lg
        if best is None or miss < best[1]:
            best = (g, miss)
        n += 1
    if best is None:
        raise GeometryError(
            f"outer diameter {d_out:.3g} m leaves no room for a single turn "
            f"at pitch {pitch:.3g} m")
    return best
