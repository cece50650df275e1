"""Sweep-level analysis pipelines.

Each pipeline turns a list of per-condition resonance extractions
(SweepRecord) into physics parameters:

  * temperature sweeps: kinetic fraction alpha and Tc from the
    quasiparticle response, fitted independently on the frequency and
    quality channels so their disagreement is visible;
  * power sweeps: saturable two-level-system loss parameters;
  * combined temperature+power fits of the full loss model;
  * parallel-field sweeps: quadratic frequency shift, vortex onset,
    electron-spin-resonance dips, and the Zeeman g-factor.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import bcs, tls
from .constants import CONST
from .core import FitResult, MaterialModel
from .errors import (DegenerateSaturation, IdentifiabilityWarning,
                     InsufficientFeatures, InsufficientSpan, NoConvergence,
                     PrefixTooShort)
from .leastsq import lm_minimize
from .resfit import S11Model
from .tls import TlsParams

__all__ = [
    "SweepRecord", "EsrFeature", "DualChannelResult", "photon_number",
    "fit_temperature_sweep_qp", "fit_power_sweep_tls", "fit_combined",
    "fit_field_quadratic", "detect_esr", "fit_zeeman", "ESR_WINDOW_T",
]

# fields above the window have vortex physics, below it a clean prefix
ESR_WINDOW_T = (0.050, 0.300)
ONSET_REFERENCE_FIELD_T = 0.050
ONSET_COLLAPSE_FACTOR = 0.5
ESR_DEPTH_THRESHOLD = 0.20
MIN_PREFIX_POINTS = 10
MIN_TEMPERATURE_RECORDS = 6
MIN_POWER_DECADES = 3.0
FIT_RTOL = 1e-8  # integration tolerance while a fitter iterates


@dataclass(frozen=True)
class SweepRecord:
    """One resonance extraction under one measurement condition.

    Exactly one of temperature, drive power, or parallel field varies
    across a sweep; the others are fixed co-conditions and may be left
    unset.  Photon number is computed from drive power and the trace
    fit, never measured.
    """

    f0: float
    q_int: float
    temperature: float | None = None
    drive_power_dbm: float | None = None
    parallel_field: float | None = None
    photon_number: float | None = None
    f0_err: float = 0.0
    q_int_err: float = 0.0

    def __post_init__(self):
        if not (self.f0 > 0 and self.q_int > 0):
            raise ValueError("f0 and q_int must be positive")
        if self.f0_err < 0 or self.q_int_err < 0:
            raise ValueError("uncertainties must be non-negative")


@dataclass(frozen=True)
class EsrFeature:
    """A resolved Q_int dip attributed to electron spin resonance."""

    b_dip: float
    f0: float
    dip_depth: float
    window: tuple = ESR_WINDOW_T

    def __post_init__(self):
        if not (self.window[0] <= self.b_dip <= self.window[1]):
            raise ValueError(
                f"dip at {self.b_dip} T outside window {self.window}")
        if not (self.dip_depth > 0):
            raise ValueError("dip depth must be positive")


@dataclass(frozen=True)
class DualChannelResult:
    """Side-by-side fits of the frequency and quality channels.

    The two channels are never merged: their disagreement on shared
    parameters (alpha, Tc, Q_TLS0) is itself a result.
    """

    freq_channel: FitResult
    quality_channel: FitResult

    def separation(self, name: str) -> float:
        """|difference| of a shared parameter in combined-sigma units."""
        a, b = self.freq_channel[name], self.quality_channel[name]
        sa = self.freq_channel.stderr(name)
        sb = self.quality_channel.stderr(name)
        scale = math.hypot(sa, sb)
        if scale == 0.0:
            return 0.0 if a == b else math.inf
        return abs(a - b) / scale


def photon_number(power_dbm: float, atten_db: float, fit) -> float:
    """Average photon number in the resonator at a given drive.

    <n> = 2 P Q_l^2 / (|Q_e| hbar omega0^2), with P the on-chip power
    after the attenuation chain.  `fit` is either an S11Model or a
    converged FitResult over the standard reflection parameters.
    """
    if isinstance(fit, FitResult):
        if not fit.converged:
            raise ValueError("photon number requires a converged fit")
        from .resfit import model_from_fit
        model = model_from_fit(fit)
    elif isinstance(fit, S11Model):
        model = fit
    else:
        raise TypeError(f"expected S11Model or FitResult, got {type(fit)!r}")
    p_watt = 10.0 ** ((power_dbm - atten_db - 30.0) / 10.0)
    omega0 = 2.0 * math.pi * model.f0
    ql = model.q_loaded
    return 2.0 * p_watt * ql * ql / (model.q_e_mag * CONST.hbar * omega0**2)


def _sorted_by(records, attr):
    vals = [getattr(r, attr) for r in records]
    if any(v is None for v in vals):
        raise ValueError(f"every record needs `{attr}` for this sweep")
    order = np.argsort(vals)
    return [records[i] for i in order]


def _weights(errs, fallback):
    """Per-point sigmas and whether they are real measurement errors.

    All-positive errors are used as is (and the covariance is then left
    unscaled, absolute-sigma convention); otherwise a flat fallback
    scale stands in and the covariance keeps its reduced chi-square
    factor.
    """
    errs = np.asarray(errs, dtype=float)
    if np.all(errs > 0):
        return errs, True
    return np.full(len(errs), float(fallback)), False


def fit_temperature_sweep_qp(records, m0: MaterialModel) -> DualChannelResult:
    """Fit the quasiparticle response of a temperature sweep.

    Runs two independent three-parameter fits and reports both:

      frequency channel: f0(T) = f00 (1 + df_qp/f0)     -> (f00, alpha, Tc)
      quality channel:   1/Q(T) = 1/Q0 + dQinv_qp(T)    -> (Q0, alpha, Tc)

    Raises InsufficientSpan unless there are at least 6 records covering
    [0.1, 0.35] of the guessed Tc.
    """
    recs = _sorted_by(records, "temperature")
    temps = np.array([r.temperature for r in recs])
    if len(recs) < MIN_TEMPERATURE_RECORDS:
        raise InsufficientSpan(
            f"need at least {MIN_TEMPERATURE_RECORDS} temperatures, "
            f"got {len(recs)}")
    tcg = m0.tc
    if temps[0] > 0.1 * tcg or temps[-1] < 0.35 * tcg:
        raise InsufficientSpan(
            f"sweep [{temps[0]:.3g}, {temps[-1]:.3g}] K does not cover "
            f"[0.1, 0.35] x Tc guess = [{0.1 * tcg:.3g}, {0.35 * tcg:.3g}] K")

    f0s = np.array([r.f0 for r in recs])
    qs = np.array([r.q_int for r in recs])
    f_nom = float(np.median(f0s))
    tc_lo = 1.25 * temps[-1]
    tc_hi = 40.0
    alpha0 = m0.alpha if 0 < m0.alpha < 0.5 else 0.02
    tc0 = min(max(tcg, tc_lo * 1.01), tc_hi)

    f_sig, f_known = _weights([r.f0_err for r in recs], 1e-7 * f_nom)

    def freq_residual(p):
        f00, alpha, tc = p
        try:
            m = MaterialModel(tc=tc, alpha=alpha, gamma=m0.gamma)
            model = np.array([
                f00 * (1.0 + bcs.qp_frequency_shift(m, f_nom, t,
                                                    rel_tol=FIT_RTOL))
                for t in temps])
        except Exception:
            return np.full(len(temps), np.nan)
        return (model - f0s) / f_sig

    freq = lm_minimize(
        freq_residual, [f0s[0], alpha0, tc0],
        bounds=[(0.5 * f0s[0], 1.5 * f0s[0]), (0.0, 0.5), (tc_lo, tc_hi)],
        param_names=("f0_zero_hz", "alpha", "tc_k"),
        x_scale=[f_nom, 0.01, 1.0],
        scale_covariance=not f_known)
    if not freq.converged:
        raise NoConvergence("frequency-channel fit did not converge",
                            result=freq)

    q_sig, q_known = _weights([r.q_int_err for r in recs],
                              0.01 * np.median(qs))

    def quality_residual(p):
        q0, alpha, tc = p
        try:
            m = MaterialModel(tc=tc, alpha=alpha, gamma=m0.gamma)
            model = np.array([
                1.0 / (1.0 / q0 + bcs.qp_quality_shift(m, t, f_nom,
                                                       rel_tol=FIT_RTOL))
                for t in temps])
        except Exception:
            return np.full(len(temps), np.nan)
        return (model - qs) / q_sig

    q00 = min(max(float(qs[0]), 10.0), 1e12)
    quality = lm_minimize(
        quality_residual, [q00, alpha0, tc0],
        bounds=[(10.0, 1e12), (0.0, 0.5), (tc_lo, tc_hi)],
        param_names=("q_int_zero", "alpha", "tc_k"),
        x_scale=[np.median(qs), 0.01, 1.0],
        scale_covariance=not q_known)
    if not quality.converged:
        raise NoConvergence("quality-channel fit did not converge",
                            result=quality)
    return DualChannelResult(freq_channel=freq, quality_channel=quality)


def fit_power_sweep_tls(records, guess: TlsParams) -> FitResult:
    """Fit saturable TLS loss to a fixed-temperature power sweep.

    Model: 1/Q_int(n) = tanh(h f0/2 kB T) / (Q_TLS0 (1 + n/n_c)^beta)
    + 1/Q_other.  The sweep must cover at least 3 decades of photon
    number.  Raises DegenerateSaturation when the loss never leaves the
    low-power plateau; the exception carries the usable lower bound on
    n_c (the largest photon number measured).
    """
    recs = _sorted_by(records, "photon_number")
    ns = np.array([r.photon_number for r in recs], dtype=float)
    if np.any(ns <= 0):
        raise ValueError("photon numbers must be positive")
    if len(ns) < 4:
        raise InsufficientSpan(f"need at least 4 powers, got {len(ns)}")
    decades = math.log10(ns[-1] / ns[0])
    if decades < MIN_POWER_DECADES:
        raise InsufficientSpan(
            f"sweep covers {decades:.2f} decades of photon number, "
            f"needs {MIN_POWER_DECADES:g}")
    temps = [r.temperature for r in recs]
    if any(t is None for t in temps):
        raise ValueError("power-sweep records need their fixed temperature")
    t_fix = float(np.median(temps))
    f_nom = float(np.median([r.f0 for r in recs]))

    y = 1.0 / np.array([r.q_int for r in recs])
    y_med = float(np.median(y))
    if (y.max() - y.min()) < 0.05 * y_med:
        raise DegenerateSaturation(
            "loss is flat across the sweep; n_c is unidentifiable",
            nc_lower_bound=float(ns[-1]))

    th = tls.saturation_tanh(f_nom, t_fix)
    q_other0 = guess.q_other if math.isfinite(guess.q_other) else 2.0 / y.min()
    p0 = [guess.q_tls0 if math.isfinite(guess.q_tls0) else th / (y.max() - y.min()),
          guess.n_c, guess.beta, q_other0]

    def residual(p):
        q_tls0, n_c, beta, q_other = p
        model = th / (q_tls0 * (1.0 + ns / n_c) ** beta) + 1.0 / q_other
        return (model - y) / y

    result = lm_minimize(
        residual, p0,
        bounds=[(1e2, 1e12), (1e-9, 1e15), (1e-3, 3.0), (1e2, 1e15)],
        param_names=("q_tls0", "n_c", "beta", "q_other"),
        x_scale=[p0[0], max(p0[1], 1.0), 1.0, p0[3]])
    if not result.converged:
        raise NoConvergence("power-sweep fit did not converge", result=result)
    n_c_fit = result["n_c"]
    if n_c_fit > ns[-1]:
        raise DegenerateSaturation(
            f"fitted n_c = {n_c_fit:.3g} beyond the measured range; "
            "saturation never observed", nc_lower_bound=float(ns[-1]))
    p_fit = TlsParams(q_tls0=result["q_tls0"], n_c=n_c_fit,
                      beta=result["beta"], q_other=result["q_other"])
    return dataclasses.replace(result, meta={
        "temperature_k": t_fix,
        "f0_hz": f_nom,
        "single_photon_q_int": 1.0 / tls.power_law_loss(p_fit, 1.0, f_nom,
                                                        t_fix),
    })


def _warn_if_degenerate(result: FitResult, name_a: str, name_b: str):
    try:
        ia = result.param_names.index(name_a)
        ib = result.param_names.index(name_b)
    except ValueError:
        return
    ca = result.covariance[ia, ia]
    cb = result.covariance[ib, ib]
    if not (np.isfinite(ca) and np.isfinite(cb)) or ca <= 0 or cb <= 0:
        return
    corr = result.covariance[ia, ib] / math.sqrt(ca * cb)
    if abs(corr) > 0.99:
        warnings.warn(
            f"{name_a} and {name_b} are degenerate (correlation "
            f"{corr:+.4f}); their individual values are unreliable",
            IdentifiabilityWarning, stacklevel=3)


def fit_combined(records_temp, records_power, m0: MaterialModel,
                 t0: TlsParams) -> DualChannelResult:
    """Joint TLS + quasiparticle fit of temperature and power sweeps.

    Frequency channel (temperature sweep only, 4 parameters):
        df/f0 = TLS digamma shift + quasiparticle shift
        parameters (f00, Q_TLS0, alpha, Tc)

    Quality channel (both sweeps, 7 parameters):
        1/Q = 1/Q_TLS(n, T) + dQinv_qp(T) + 1/Q_other
        parameters (Q_TLS0, alpha, Tc, D, beta1, beta2, Q_other)

    Both channels' Q_TLS0 are reported separately; an
    IdentifiabilityWarning fires when alpha and Q_TLS0 are more than
    99% correlated in either channel.
    """
    recs_t = _sorted_by(records_temp, "temperature")
    if len(recs_t) < MIN_TEMPERATURE_RECORDS:
        raise InsufficientSpan(
            f"need at least {MIN_TEMPERATURE_RECORDS} temperatures, "
            f"got {len(recs_t)}")
    recs_p = _sorted_by(records_power, "photon_number")
    if not recs_p:
        raise InsufficientSpan("combined fit needs a power sweep")

    temps = np.array([r.temperature for r in recs_t])
    f0s = np.array([r.f0 for r in recs_t])
    f_nom = float(np.median(f0s))
    tc_lo = 1.25 * float(temps[-1])
    alpha0 = m0.alpha if 0 < m0.alpha < 0.5 else 0.02
    tc0 = min(max(m0.tc, tc_lo * 1.01), 40.0)
    qtls0_0 = t0.q_tls0 if math.isfinite(t0.q_tls0) else 1e5

    f_sig, f_known = _weights([r.f0_err for r in recs_t], 1e-7 * f_nom)

    def freq_residual(p):
        f00, q_tls0, alpha, tc = p
        try:
            m = MaterialModel(tc=tc, alpha=alpha, gamma=m0.gamma)
            model = np.array([
                f00 * (1.0
                       + tls.tls_frequency_shift(q_tls0, f_nom, t)
                       + bcs.qp_frequency_shift(m, f_nom, t,
                                                rel_tol=FIT_RTOL))
                for t in temps])
        except Exception:
            return np.full(len(temps), np.nan)
        return (model - f0s) / f_sig

    freq = lm_minimize(
        freq_residual, [f0s[0], qtls0_0, alpha0, tc0],
        bounds=[(0.5 * f0s[0], 1.5 * f0s[0]), (1e2, 1e12), (0.0, 0.5),
                (tc_lo, 40.0)],
        param_names=("f0_zero_hz", "q_tls0", "alpha", "tc_k"),
        x_scale=[f_nom, qtls0_0, 0.01, 1.0],
        scale_covariance=not f_known)
    if not freq.converged:
        raise NoConvergence("frequency-channel combined fit did not converge",
                            result=freq)
    _warn_if_degenerate(freq, "alpha", "q_tls0")

    # quality channel runs over both sweeps at once
    pairs = []
    ys = []
    errs = []
    for r in recs_t:
        n = r.photon_number if r.photon_number is not None else 0.0
        pairs.append((float(r.temperature), float(n)))
        ys.append(1.0 / r.q_int)
        errs.append(r.q_int_err / r.q_int**2 if r.q_int_err > 0 else 0.0)
    t_fix = float(np.median([r.temperature for r in recs_p
                             if r.temperature is not None] or [temps[0]]))
    for r in recs_p:
        t_here = r.temperature if r.temperature is not None else t_fix
        pairs.append((float(t_here), float(r.photon_number)))
        ys.append(1.0 / r.q_int)
        errs.append(r.q_int_err / r.q_int**2 if r.q_int_err > 0 else 0.0)
    ys = np.array(ys)
    errs = np.array(errs)
    q_known = bool(np.all(errs > 0))
    weights = errs if q_known else np.abs(ys)
    all_t_max = max(p[0] for p in pairs)
    tc_lo_q = 1.25 * all_t_max

    q_other0 = t0.q_other if math.isfinite(t0.q_other) else 1.0 / ys.min()

    def quality_residual(p):
        q_tls0, alpha, tc, d_sat, beta1, beta2, q_other = p
        try:
            m = MaterialModel(tc=tc, alpha=alpha, gamma=m0.gamma)
            tp = TlsParams(q_tls0=q_tls0, sat_scale_d=d_sat, beta1=beta1,
                           beta2=beta2, q_other=q_other)
            model = np.array([
                1.0 / tls.tls_quality(tp, n, f_nom, t)
                + bcs.qp_quality_shift(m, t, f_nom, rel_tol=FIT_RTOL)
                + 1.0 / q_other
                for t, n in pairs])
        except Exception:
            return np.full(len(pairs), np.nan)
        return (model - ys) / weights

    quality = lm_minimize(
        quality_residual,
        [qtls0_0, alpha0, tc0, t0.sat_scale_d, t0.beta1, t0.beta2, q_other0],
        bounds=[(1e2, 1e12), (0.0, 0.5), (tc_lo_q, 40.0), (1e-12, 1e12),
                (1e-3, 3.0), (1e-3, 3.0), (1e2, 1e15)],
        param_names=("q_tls0", "alpha", "tc_k", "sat_scale_d", "beta1",
                     "beta2", "q_other"),
        x_scale=[qtls0_0, 0.01, 1.0, max(t0.sat_scale_d, 1e-3), 1.0, 1.0,
                 q_other0],
        scale_covariance=not q_known)
    if not quality.converged:
        raise NoConvergence("quality-channel combined fit did not converge",
                            result=quality)
    _warn_if_degenerate(quality, "alpha", "q_tls0")
    return DualChannelResult(freq_channel=freq, quality_channel=quality)


def fit_field_quadratic(records) -> FitResult:
    """Quadratic frequency shift and vortex onset of a field sweep.

    Fits f0(B) = f0(0) - c2 B^2 on the prefix below the vortex onset.
    The onset is the smallest field where Q_int falls under half the
    low-field median, with the ESR window excluded from the scan; when
    quality never degrades the onset is reported at the sweep maximum
    with meta["onset_found"] = False.

    Raises PrefixTooShort when fewer than 10 points survive below the
    onset.
    """
    recs = _sorted_by(records, "parallel_field")
    b = np.array([r.parallel_field for r in recs], dtype=float)
    f0 = np.array([r.f0 for r in recs])
    q = np.array([r.q_int for r in recs])

    low = q[b < ONSET_REFERENCE_FIELD_T]
    q_ref = float(np.median(low if len(low) else q[:5]))
    onset = float(b[-1])
    onset_found = False
    for i in range(len(b)):
        if ESR_WINDOW_T[0] <= b[i] <= ESR_WINDOW_T[1]:
            continue
        if q[i] < ONSET_COLLAPSE_FACTOR * q_ref:
            onset = float(b[i])
            onset_found = True
            break
    prefix = b < onset if onset_found else np.ones(len(b), dtype=bool)
    n_pre = int(prefix.sum())
    if n_pre < MIN_PREFIX_POINTS:
        raise PrefixTooShort(
            f"only {n_pre} points below the vortex onset at {onset:.3g} T; "
            f"need {MIN_PREFIX_POINTS}")

    x = np.column_stack([np.ones(n_pre), -b[prefix] ** 2])
    yf = f0[prefix]
    coef, *_ = np.linalg.lstsq(x, yf, rcond=None)
    resid = yf - x @ coef
    rss = float(resid @ resid)
    dof = n_pre - 2
    xtx_inv = np.linalg.inv(x.T @ x)
    cov = xtx_inv * (rss / dof if dof > 0 else 0.0)
    rms_pre = math.sqrt(rss / dof) if dof > 0 else 0.0

    blowup = None
    post = ~prefix
    if onset_found and post.any():
        model_post = coef[0] - coef[1] * b[post] ** 2
        med_dev = float(np.median(np.abs(f0[post] - model_post)))
        blowup = med_dev / max(rms_pre, 1e-9 * abs(coef[0]))

    return FitResult(
        param_names=("f0_zero_hz", "c2_hz_per_t2"),
        values=np.asarray(coef),
        covariance=cov,
        residual_norm=rss,
        dof=dof,
        converged=True,
        iterations=0,
        message="linear least squares on the pre-onset prefix",
        meta={
            "vortex_onset_t": onset,
            "onset_found": onset_found,
            "n_prefix": n_pre,
            "post_onset_residual_ratio": blowup,
            "esr_window_t": ESR_WINDOW_T,
        })


def detect_esr(records, window=ESR_WINDOW_T,
               depth_threshold=ESR_DEPTH_THRESHOLD):
    """Find electron-spin-resonance dips in Q_int over a field sweep.

    Scans the window for local minima at least `depth_threshold` below
    the local median (points within 50 mT, dip core excluded) and
    refines each dip field by parabolic interpolation.  Returns a list
    of EsrFeature, empty when nothing clears the threshold; expects the
    field grid inside the window to be 10 mT or finer.
    """
    recs = _sorted_by(records, "parallel_field")
    b = np.array([r.parallel_field for r in recs], dtype=float)
    q = np.array([r.q_int for r in recs])
    f0 = np.array([r.f0 for r in recs])

    features = []
    for i in range(1, len(b) - 1):
        if not (window[0] <= b[i] <= window[1]):
            continue
        if not (q[i] <= q[i - 1] and q[i] <= q[i + 1]):
            continue
        near = np.abs(b - b[i]) <= 0.050
        near[max(i - 1, 0):i + 2] = False
        ref = float(np.median(q[near])) if near.any() else float(np.median(q))
        if ref <= 0:
            continue
        depth = 1.0 - q[i] / ref
        if depth <= depth_threshold:
            continue
        # parabola through the three points around the minimum
        y0, y1, y2 = q[i - 1], q[i], q[i + 1]
        denom = y0 - 2.0 * y1 + y2
        b_dip = b[i]
        if denom > 0:
            shift = 0.5 * (y0 - y2) / denom
            shift = min(max(shift, -1.0), 1.0)
            b_dip = b[i] + shift * 0.5 * (b[i + 1] - b[i - 1])
        b_dip = min(max(b_dip, window[0]), window[1])
        features.append(EsrFeature(b_dip=float(b_dip), f0=float(f0[i]),
                                   dip_depth=float(depth), window=window))
    # a broad dip can produce several adjacent minima; keep the deepest
    features.sort(key=lambda ft: ft.b_dip)
    merged = []
    for ft in features:
        if merged and abs(ft.b_dip - merged[-1].b_dip) < 0.020:
            if ft.dip_depth > merged[-1].dip_depth:
                merged[-1] = ft
        else:
            merged.append(ft)
    return merged


def fit_zeeman(features) -> FitResult:
    """Lande g-factor from ESR features via h f0 = g muB B.

    Straight line through the origin; the returned standard error comes
    from the scatter of the features about the fitted line.
    """
    if len(features) < 2:
        raise InsufficientFeatures(
            f"need at least 2 ESR features, got {len(features)}")
    b = np.array([ft.b_dip for ft in features])
    e = np.array([CONST.h * ft.f0 for ft in features])
    sxx = float(b @ b)
    g = float(e @ b) / (CONST.muB * sxx)
    resid = e - g * CONST.muB * b
    dof = len(features) - 1
    var_g = float(resid @ resid) / (dof * sxx * CONST.muB**2) if dof else 0.0
    return FitResult(
        param_names=("g_factor",),
        values=np.array([g]),
        covariance=np.array([[var_g]]),
        residual_norm=float(resid @ resid),
        dof=dof,
        converged=True,
        iterations=0,
        message="weighted line through the origin",
        meta={"n_features": len(features)})
