"""Forward simulator for traces and sweeps with controlled noise.

Everything here is deterministic given the seed.  The noise generator
is xoshiro256** seeded through splitmix64, chosen because both are
published, tiny, and exactly reproducible in any language; the test
suite pins reference words, uniforms, and normals for fixed seeds.
Uniforms map words to (0, 1] via ((w >> 11) + 1) * 2^-53 and normals
use the trigonometric Box-Muller transform, one (cos, sin) pair per
two uniforms.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .core import ComplexSpectrum, MaterialModel
from .constants import CONST
from .errors import ModelDomainError
from .resfit import S11Model, s11_forward
from .sweeps import SweepRecord
from .tls import TlsParams, combined_loss_model, power_law_loss, \
    tls_frequency_shift
from . import bcs

__all__ = ["Xoshiro256StarStar", "FieldTruth", "NoiseSpec", "GroundTruth",
           "synth_trace", "synth_sweep", "default_frequency_grid"]

_M64 = (1 << 64) - 1


def _rotl64(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _M64


SWEEP_KINDS = ("temperature", "power", "field")
POWER_MODELS = ("saturation", "combined")
# hardcoded cubic deviation strength beyond the vortex onset
CUBIC_DEVIATION_FACTOR = 10.0


class Xoshiro256StarStar:
    """Seedable portable pseudo-random generator.

    The 64-bit state update runs in plain Python integers so the word
    stream is exactly the published algorithm; scalar math.log/cos/sin
    keep the normal deviates identical to a line-by-line reimplementation
    regardless of any vector math library.
    """

    def __init__(self, seed: int):
        x = int(seed) & _M64
        s = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & _M64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
            s.append(z ^ (z >> 31))
        self._s = s

    def next_word(self) -> int:
        s = self._s
        result = (_rotl64((s[1] * 5) & _M64, 7) * 9) & _M64
        t = (s[1] << 17) & _M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl64(s[3], 45)
        return result

    def words(self, count: int) -> list:
        return [self.next_word() for _ in range(count)]

    def uniforms(self, count: int) -> np.ndarray:
        """count samples from (0, 1]."""
        w = self.words(count)
        return (np.array([x >> 11 for x in w], dtype=np.float64) + 1.0) \
            * 2.0 ** -53

    def normals(self, count: int) -> np.ndarray:
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        out = np.empty(2 * pairs)
        for i in range(pairs):
            r = math.sqrt(-2.0 * math.log(u[2 * i]))
            a = 2.0 * math.pi * u[2 * i + 1]
            out[2 * i] = r * math.cos(a)
            out[2 * i + 1] = r * math.sin(a)
        return out[:count]


@dataclass(frozen=True)
class FieldTruth:
    """Phenomenological parallel-field response.

    c2 is the quadratic frequency-shift curvature in Hz/T^2; beyond
    vortex_onset the quality collapses as exp(-rate (B-B_on)/B_on) and
    the frequency acquires a cubic deviation from the quadratic trend.
    The ESR dip is a Lorentzian in 1/Q_int centered at h f0/(g muB).
    """

    c2: float = 5e7
    vortex_onset: float = 0.9
    collapse_rate: float = 60.0
    esr_g: float = 1.97
    esr_depth: float = 0.5
    esr_width: float = 0.008

    def __post_init__(self):
        if not (0 <= self.esr_depth < 1):
            raise ValueError("esr_depth must be a fraction in [0, 1)")
        if self.esr_width <= 0 or self.esr_g <= 0 or self.vortex_onset <= 0:
            raise ValueError("field parameters must be positive")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise levels for synthetic data.

    complex_sigma is the per-quadrature standard deviation added to
    traces.  q_int_rel_sigma is relative to each Q_int value.
    f0_rel_sigma is relative to each point's frequency shift from the
    sweep's first grid point: f0 itself comes out of a trace fit at
    sub-ppm resolution, so measurement error grows with the shift being
    tracked, not with f0.
    """

    complex_sigma: float = 0.0
    q_int_rel_sigma: float = 0.0
    f0_rel_sigma: float = 0.0

    def __post_init__(self):
        if min(self.complex_sigma, self.q_int_rel_sigma,
               self.f0_rel_sigma) < 0:
            raise ValueError("noise scales must be non-negative")


@dataclass(frozen=True)
class GroundTruth:
    """Complete known-truth configuration for the simulator."""

    s11: S11Model
    material: MaterialModel
    tls: TlsParams
    field: FieldTruth = FieldTruth()
    noise: NoiseSpec = NoiseSpec()
    seed: int = 0


def default_frequency_grid(model: S11Model, n_points: int = 401,
                           span_linewidths: float = 40.0) -> np.ndarray:
    """Symmetric grid around f0 wide enough to see the background."""
    span = span_linewidths * model.f0 / model.q_loaded
    return np.linspace(model.f0 - span / 2.0, model.f0 + span / 2.0,
                       n_points)


def synth_trace(gt: GroundTruth, grid, drive_power_dbm: float | None = None,
                attenuation_db: float = 0.0) -> ComplexSpectrum:
    """Reflection trace on a grid plus complex Gaussian noise.

    Noise draws two normals per point, real quadrature first.
    """
    grid = np.asarray(grid, dtype=float)
    values = s11_forward(gt.s11, grid).astype(complex)
    if gt.noise.complex_sigma > 0:
        rng = Xoshiro256StarStar(gt.seed)
        z = rng.normals(2 * len(grid))
        values = values + gt.noise.complex_sigma * (z[0::2] + 1j * z[1::2])
    return ComplexSpectrum(frequencies=grid, values=values,
                           drive_power_dbm=drive_power_dbm,
                           attenuation_db=attenuation_db)


def _temperature_truth(gt: GroundTruth, temps, photon_number: float):
    f00 = gt.s11.f0
    f0s, qs = [], []
    for t in temps:
        q_inv, shift = combined_loss_model(gt.material, gt.tls,
                                           photon_number, t, f00)
        f0s.append(f00 * (1.0 + shift))
        qs.append(1.0 / q_inv)
    return np.array(f0s), np.array(qs)


def _power_truth(gt: GroundTruth, ns, temperature: float, power_model: str):
    f00 = gt.s11.f0
    f0s, qs = [], []
    for n in ns:
        if power_model == "saturation":
            q_inv = power_law_loss(gt.tls, float(n), f00, temperature)
            shift = (tls_frequency_shift(gt.tls.q_tls0, f00, temperature)
                     + bcs.qp_frequency_shift(gt.material, f00, temperature))
        else:
            q_inv, shift = combined_loss_model(gt.material, gt.tls, float(n),
                                               temperature, f00)
        f0s.append(f00 * (1.0 + shift))
        qs.append(1.0 / q_inv)
    return np.array(f0s), np.array(qs)


def _field_truth(gt: GroundTruth, fields):
    f00 = gt.s11.f0
    ft = gt.field
    b = np.asarray(fields, dtype=float)
    f0s = f00 - ft.c2 * b * b
    q_inv0 = 1.0 / gt.s11.q_int
    b_esr = CONST.h * f00 / (ft.esr_g * CONST.muB)
    amp = ft.esr_depth / (1.0 - ft.esr_depth)
    lorentz = amp * ft.esr_width**2 / ((b - b_esr) ** 2 + ft.esr_width**2)
    q_inv = q_inv0 * (1.0 + lorentz)
    qs = 1.0 / q_inv
    beyond = b > ft.vortex_onset
    if beyond.any():
        over = (b[beyond] - ft.vortex_onset) / ft.vortex_onset
        qs[beyond] *= np.exp(-ft.collapse_rate * over)
        kappa = CUBIC_DEVIATION_FACTOR * ft.c2 / ft.vortex_onset
        f0s[beyond] -= kappa * (b[beyond] - ft.vortex_onset) ** 3
    return f0s, qs


def synth_sweep(gt: GroundTruth, kind: str, grid,
                photon_number: float = 0.0, temperature: float = 0.060,
                power_model: str = "saturation") -> list:
    """Generate SweepRecords for one sweep from known truth.

    Parameters
    ----------
    kind : {"temperature", "power", "field"}
        Which condition the grid runs over (K, photons, or T).
    photon_number : float
        Fixed readout photon number for temperature sweeps.
    temperature : float
        Fixed temperature for power and field sweeps.
    power_model : {"saturation", "combined"}
        Power sweeps can follow either the four-parameter saturable
        power law or the full combined loss model.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"kind must be one of {SWEEP_KINDS}, got {kind!r}")
    if power_model not in POWER_MODELS:
        raise ValueError(
            f"power_model must be one of {POWER_MODELS}, got {power_model!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be 1-D and strictly increasing")

    if kind == "temperature":
        f0s, qs = _temperature_truth(gt, grid, photon_number)
    elif kind == "power":
        if np.any(grid <= 0):
            raise ModelDomainError("photon numbers must be positive")
        f0s, qs = _power_truth(gt, grid, temperature, power_model)
    else:
        if np.any(grid < 0):
            raise ModelDomainError("fields must be non-negative")
        f0s, qs = _field_truth(gt, grid)

    # frequency noise scales with the local shift from the first grid
    # point (a null-referenced measurement: the plateau is pinned, large
    # shifts carry proportionally larger errors), floored at the typical
    # resolution of a single trace fit
    f0_ref = float(f0s[0])
    f0_floor = 1e-8 * abs(f0_ref)
    rng = Xoshiro256StarStar(gt.seed)
    records = []
    for i, c in enumerate(grid):
        z_f, z_q = rng.normals(2)
        f0_sigma = max(gt.noise.f0_rel_sigma * abs(f0s[i] - f0_ref),
                       f0_floor if gt.noise.f0_rel_sigma > 0 else 0.0)
        f0 = f0s[i] + f0_sigma * z_f
        q = qs[i] * (1.0 + gt.noise.q_int_rel_sigma * z_q)
        q = max(q, 1e-6 * qs[i])
        rec = SweepRecord(
            f0=float(f0),
            q_int=float(q),
            temperature=float(c) if kind == "temperature" else (
                float(temperature) if kind == "power" else None),
            parallel_field=float(c) if kind == "field" else None,
            photon_number=float(c) if kind == "power" else (
                float(photon_number) if kind == "temperature" else None),
            f0_err=float(f0_sigma),
            q_int_err=float(qs[i] * gt.noise.q_int_rel_sigma),
        )
        records.append(rec)
    return records
