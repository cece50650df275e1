"""Two-level-system loss and frequency-shift models.

Three interchangeable descriptions are provided:

  * power_law_loss      -- saturable loss with a phenomenological exponent,
                           Qint^-1 = tanh(hf/2kT)/(QTLS0 (1+n/nc)^beta) + Qother^-1
  * tls_frequency_shift -- digamma form of the dispersive TLS shift
  * tls_quality         -- temperature- and power-dependent QTLS with the
                           saturation group n^b2/(D T^b1)

plus combined_loss_model, which sums the TLS, quasiparticle and residual
channels for both the loss and the fractional frequency shift.

The saturation scale D absorbs its units: the group n^b2/(D T^b1) is
dimensionless with T in kelvin and n in photons.  tanh arguments are
capped at 700 so the T -> 0 limit cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import bcs, kernels
from .constants import CONST
from .core import MaterialModel
from .errors import ModelDomainError

TANH_ARG_CAP = 700.0


@dataclass(frozen=True)
class TlsParams:
    """TLS channel parameters shared by the saturation models.

    q_tls0 and q_other may be infinite (a disabled channel); everything
    else must be positive, with exponents in (0, 3].
    """

    q_tls0: float            # low-power, low-T TLS quality factor
    n_c: float = 1.0         # critical photon number
    beta: float = 0.5        # power-law saturation exponent
    sat_scale_d: float = 1.0  # saturation scale D (photons^b2 / K^b1)
    beta1: float = 1.0       # temperature exponent in the saturation group
    beta2: float = 1.0       # photon exponent in the saturation group
    q_other: float = math.inf  # residual (power/temperature independent)

    def __post_init__(self):
        if not (self.q_tls0 > 0 and self.q_other > 0):
            raise ValueError("quality factors must be positive")
        if not (self.n_c > 0 and self.sat_scale_d > 0):
            raise ValueError("n_c and the saturation scale must be positive")
        for name in ("beta", "beta1", "beta2"):
            v = getattr(self, name)
            if not (0.0 < v <= 3.0):
                raise ValueError(f"{name} must lie in (0, 3], got {v}")


def saturation_tanh(f0: float, t: float) -> float:
    """tanh(h f0 / 2 kB T) with the overflow cap."""
    if t <= 0.0:
        raise ModelDomainError(f"temperature must be positive, got {t} K")
    return math.tanh(min(CONST.h * f0 / (2.0 * CONST.kB * t), TANH_ARG_CAP))


def complex_digamma_real(y: float) -> float:
    """Re psi(1/2 + i y); thin wrapper over the active kernel backend."""
    return kernels.digamma_half_real(float(y))


def tls_frequency_shift(q_tls0: float, f0: float, t: float) -> float:
    """Fractional TLS frequency shift.

    (1/(pi QTLS0)) [Re psi(1/2 + i hf0/(2 pi kB T)) - ln(hf0/(2 pi kB T))].
    The bracket grows like ln T at high temperature and falls to zero as
    T -> 0 (approaching through small negative values below the digamma
    crossover, of magnitude -1/(24 y^2)).
    """
    if t <= 0.0:
        raise ModelDomainError(f"temperature must be positive, got {t} K")
    if not math.isfinite(q_tls0):
        return 0.0
    y = CONST.h * f0 / (2.0 * math.pi * CONST.kB * t)
    bracket = complex_digamma_real(y) - math.log(y)
    return bracket / (math.pi * q_tls0)


def tls_quality(p: TlsParams, n_phot: float, f0: float, t: float) -> float:
    """Temperature- and power-dependent TLS quality factor.

    QTLS = QTLS0 sqrt(1 + (n^b2/(D T^b1)) tanh(hf0/2kBT)) / tanh(hf0/2kBT).
    At n_phot = 0 this collapses to QTLS0/tanh exactly.
    """
    if n_phot < 0.0:
        raise ValueError(f"photon number must be non-negative, got {n_phot}")
    th = saturation_tanh(f0, t)
    if n_phot == 0.0:
        return p.q_tls0 / th
    group = n_phot**p.beta2 / (p.sat_scale_d * t**p.beta1)
    return p.q_tls0 * math.sqrt(1.0 + group * th) / th


def power_law_loss(p: TlsParams, n_phot: float, f0: float, t: float) -> float:
    """Saturable TLS loss plus residual: the simple power-law model."""
    if n_phot < 0.0:
        raise ValueError(f"photon number must be non-negative, got {n_phot}")
    th = saturation_tanh(f0, t)
    return th / (p.q_tls0 * (1.0 + n_phot / p.n_c) ** p.beta) + 1.0 / p.q_other


def combined_loss_model(m: MaterialModel, p: TlsParams, n_phot: float,
                        t: float, f0: float) -> tuple[float, float]:
    """Total internal loss and fractional shift from all three channels.

    Returns (Qint^-1, df/f0) where

        Qint^-1 = QTLS(n,T)^-1 + QQP(T)^-1 + Qother^-1
        df/f0   = TLS digamma shift + quasiparticle shift

    The quasiparticle channel is referenced to 10 mK, i.e. its loss is
    zero there by definition; any true zero-temperature quasiparticle
    loss is indistinguishable from Qother.
    """
    q_tls = tls_quality(p, n_phot, f0, t)
    qp_inv = bcs.qp_quality_shift(m, t, f0)
    q_inv = 1.0 / q_tls + qp_inv + 1.0 / p.q_other
    shift = (tls_frequency_shift(p.q_tls0, f0, t)
             + bcs.qp_frequency_shift(m, f0, t))
    return q_inv, shift
