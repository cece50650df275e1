"""Command line interface and analysis pipeline orchestration.

One verb per analysis: `design`, `fit-trace`, `fit-temp`, `fit-power`,
`fit-combined`, `fit-field`, `synth`, `report`.  All inputs arrive
through a flat key-value manifest (`--manifest`); reports are canonical
JSON (byte-identical for identical inputs) where every numeric key
carries a unit suffix.

Exit codes: 0 success, 2 validation error, 3 fit non-convergence,
4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bcs, design, io, sweeps, tls
from .constants import CONST
from .core import FitResult, MaterialModel, SpiralGeometry
from .errors import (BoundsViolation, DegenerateSaturation, GeometryError,
                     InsufficientFeatures, InsufficientSpan,
                     ModelDomainError, NoConvergence, NoDipFound, ParseError,
                     PrefixTooShort, SpiralresError, UnitError)
from .resfit import S11Model, fit_s11, model_from_fit
from .sweeps import (SweepRecord, detect_esr, fit_combined,
                     fit_field_quadratic, fit_power_sweep_tls,
                     fit_temperature_sweep_qp, fit_zeeman, photon_number)
from .synth import (FieldTruth, GroundTruth, NoiseSpec, default_frequency_grid,
                    synth_sweep, synth_trace)
from .tls import TlsParams

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FIT = 3
EXIT_IO = 4

MAX_FAILED_TRACE_FRACTION = 0.20

# plausibility bands for fabricated devices of this family
SINGLE_PHOTON_Q_BAND = (0.9e5, 2.1e5)
Q_TLS0_BAND = (0.36e5, 7.4e5)
G_FACTOR_BAND = (1.96, 1.98)
ALPHA_BAND = (0.015, 0.08)
TC_BAND_K = (7.9, 8.3)

_UNIT_SUFFIXES = ("_hz", "_k", "_t", "_s", "_db", "_dbm", "_rad", "_m",
                  "_h", "_ohm", "_w", "_j", "_hz2", "_hz_per_t2",
                  "_dimensionless", "_per_k")


def _suffixed(name: str) -> str:
    """Report keys must spell their unit; bare names are dimensionless."""
    return name if name.endswith(_UNIT_SUFFIXES) else \
        f"{name}_dimensionless"


def _sanitize(value):
    if isinstance(value, dict):
        return {(k if not isinstance(v, (int, float, np.integer, np.floating))
                 or isinstance(v, bool) else _suffixed(k)): _sanitize(v)
                for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_sanitize(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _fit_block(fit: FitResult, residual_unit: str = "dimensionless") -> dict:
    params = {_suffixed(n): float(fit[n]) for n in fit.param_names}
    stderr = {_suffixed(n): float(fit.stderr(n)) for n in fit.param_names}
    return {
        "params": params,
        "stderr": stderr,
        "converged": bool(fit.converged),
        "ill_conditioned": bool(fit.ill_conditioned),
        "iterations_dimensionless": int(fit.iterations),
        "dof_dimensionless": int(fit.dof),
        f"residual_norm_{residual_unit}": float(fit.residual_norm),
        "message": fit.message,
        "meta": _sanitize(dict(fit.meta)),
    }


# --- manifest plumbing ----------------------------------------------------

_CONDITION_FIELDS = {
    "temperature_k": "temperature",
    "power_dbm": "drive_power_dbm",
    "field_t": "parallel_field",
}


def _guess(manifest: io.SweepManifest, key: str, default: float) -> float:
    return float(manifest.guesses.get(key, default))


def _material_guess(manifest: io.SweepManifest) -> MaterialModel:
    return MaterialModel(
        tc=_guess(manifest, "tc_guess_k", 8.0),
        alpha=_guess(manifest, "alpha_guess", 0.02))


def _tls_guess(manifest: io.SweepManifest) -> TlsParams:
    return TlsParams(
        q_tls0=_guess(manifest, "q_tls0_guess", 1e5),
        n_c=_guess(manifest, "n_c_guess", 1.0),
        beta=_guess(manifest, "beta_guess", 0.3),
        sat_scale_d=_guess(manifest, "sat_d_guess", 1.0),
        beta1=_guess(manifest, "beta1_guess", 1.0),
        beta2=_guess(manifest, "beta2_guess", 1.0),
        q_other=_guess(manifest, "q_other_guess", math.inf))


def _fit_group(manifest: io.SweepManifest, points, threads: int):
    """Fit every referenced trace; abort if too many fail."""
    def one(pt):
        spectrum = io.ingest_trace(manifest.resolve(pt.file))
        return fit_s11(spectrum)

    results = [None] * len(points)
    failures = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {i: pool.submit(one, pt)
                       for i, pt in enumerate(points)}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except (SpiralresError, ValueError) as exc:
                    failures.append((i, exc))
    else:
        for i, pt in enumerate(points):
            try:
                results[i] = one(pt)
            except (SpiralresError, ValueError) as exc:
                failures.append((i, exc))
    if len(failures) > MAX_FAILED_TRACE_FRACTION * len(points):
        detail = "; ".join(f"{points[i].file}: {exc}" for i, exc in failures)
        raise NoConvergence(
            f"{len(failures)}/{len(points)} traces failed, above the "
            f"{MAX_FAILED_TRACE_FRACTION:.0%} abort threshold: {detail}")
    return results, failures


def _trace_report_rows(points, fits, failures):
    rows = []
    for pt, fit in zip(points, fits):
        if fit is None:
            continue
        row = {"file": pt.file,
               "condition": _sanitize(pt.condition)}
        row.update(_fit_block(fit))
        rows.append(row)
    failed = [{"file": points[i].file, "error": str(exc)}
              for i, exc in sorted(failures, key=lambda t: t[0])]
    return rows, failed


def _records_from_fits(manifest: io.SweepManifest, points, fits,
                       group: str) -> list:
    records = []
    fixed_temp = manifest.fixed.get("temperature_k")
    fixed_power = manifest.fixed.get("drive_power_dbm")
    readout_n = manifest.fixed.get("readout_photon_number")
    for pt, fit in zip(points, fits):
        if fit is None:
            continue
        kwargs = {}
        for key, attr in _CONDITION_FIELDS.items():
            if key in pt.condition:
                kwargs[attr] = float(pt.condition[key])
        if "temperature" not in kwargs and fixed_temp is not None:
            kwargs["temperature"] = float(fixed_temp)
        power = kwargs.get("drive_power_dbm", fixed_power)
        if power is not None:
            kwargs["drive_power_dbm"] = float(power)
            kwargs["photon_number"] = photon_number(
                float(power), manifest.attenuation_db, fit)
        elif readout_n is not None and group != "power":
            kwargs["photon_number"] = float(readout_n)
        records.append(SweepRecord(
            f0=fit["f0_hz"], q_int=fit["q_int"],
            f0_err=fit.stderr("f0_hz"), q_int_err=fit.stderr("q_int"),
            **kwargs))
    return records


def _in_band(value: float, band) -> bool:
    return bool(band[0] <= value <= band[1])


# --- per-kind analyses ----------------------------------------------------

def _analyze_temperature(manifest, records):
    m0 = _material_guess(manifest)
    dual = fit_temperature_sweep_qp(records, m0)
    temps = [r.temperature for r in records]
    f_nom = float(np.median([r.f0 for r in records]))
    fff = dual.freq_channel
    qqq = dual.quality_channel
    m_f = MaterialModel(tc=fff["tc_k"], alpha=fff["alpha"])
    m_q = MaterialModel(tc=qqq["tc_k"], alpha=qqq["alpha"])
    f_curve = [fff["f0_zero_hz"] * (1.0 + bcs.qp_frequency_shift(m_f, f_nom,
                                                                 t))
               for t in temps]
    q_curve = [1.0 / (1.0 / qqq["q_int_zero"]
                      + bcs.qp_quality_shift(m_q, t, f_nom)) for t in temps]
    analysis = {
        "freq_channel": _fit_block(fff),
        "quality_channel": _fit_block(qqq),
        "alpha_separation_sigma_dimensionless": dual.separation("alpha"),
        "tc_separation_sigma_dimensionless": dual.separation("tc_k"),
    }
    plausibility = {
        "alpha_freq_in_band": _in_band(fff["alpha"], ALPHA_BAND),
        "alpha_quality_in_band": _in_band(qqq["alpha"], ALPHA_BAND),
        "tc_freq_in_band": _in_band(fff["tc_k"], TC_BAND_K),
        "tc_quality_in_band": _in_band(qqq["tc_k"], TC_BAND_K),
        "alpha_band_dimensionless": list(ALPHA_BAND),
        "tc_band_k": list(TC_BAND_K),
    }
    curves = {
        "temperature_k": list(map(float, temps)),
        "f0_model_hz": list(map(float, f_curve)),
        "q_int_model_dimensionless": list(map(float, q_curve)),
    }
    return analysis, plausibility, curves


def _analyze_power(manifest, records):
    result = fit_power_sweep_tls(records, _tls_guess(manifest))
    ns = [r.photon_number for r in records]
    p_fit = TlsParams(q_tls0=result["q_tls0"], n_c=result["n_c"],
                      beta=result["beta"], q_other=result["q_other"])
    t_fix = result.meta["temperature_k"]
    f_nom = result.meta["f0_hz"]
    q_curve = [1.0 / tls.power_law_loss(p_fit, n, f_nom, t_fix) for n in ns]
    sp = result.meta["single_photon_q_int"]
    analysis = {"power_law": _fit_block(result)}
    plausibility = {
        "single_photon_q_int_in_band": _in_band(sp, SINGLE_PHOTON_Q_BAND),
        "single_photon_q_band_dimensionless": list(SINGLE_PHOTON_Q_BAND),
        "q_tls0_in_band": _in_band(result["q_tls0"], Q_TLS0_BAND),
        "q_tls0_band_dimensionless": list(Q_TLS0_BAND),
    }
    curves = {
        "photon_number_dimensionless": list(map(float, ns)),
        "q_int_model_dimensionless": list(map(float, q_curve)),
    }
    return analysis, plausibility, curves


def _analyze_combined(manifest, records_temp, records_power):
    m0 = _material_guess(manifest)
    t0 = _tls_guess(manifest)
    dual = fit_combined(records_temp, records_power, m0, t0)
    fff, qqq = dual.freq_channel, dual.quality_channel
    f_nom = float(np.median([r.f0 for r in records_temp]))
    temps = [r.temperature for r in records_temp]
    ns = [r.photon_number for r in records_power]
    t_fix = float(np.median([r.temperature for r in records_power]))
    m_f = MaterialModel(tc=fff["tc_k"], alpha=fff["alpha"])
    f_curve = [fff["f0_zero_hz"]
               * (1.0 + tls.tls_frequency_shift(fff["q_tls0"], f_nom, t)
                  + bcs.qp_frequency_shift(m_f, f_nom, t)) for t in temps]
    m_q = MaterialModel(tc=qqq["tc_k"], alpha=qqq["alpha"])
    tp_q = TlsParams(q_tls0=qqq["q_tls0"], sat_scale_d=qqq["sat_scale_d"],
                     beta1=qqq["beta1"], beta2=qqq["beta2"],
                     q_other=qqq["q_other"])
    n_readout = float(manifest.fixed.get("readout_photon_number", 0.0))
    q_curve_temp = [
        1.0 / (1.0 / tls.tls_quality(tp_q, n_readout, f_nom, t)
               + bcs.qp_quality_shift(m_q, t, f_nom) + 1.0 / qqq["q_other"])
        for t in temps]
    q_curve_power = [
        1.0 / (1.0 / tls.tls_quality(tp_q, n, f_nom, t_fix)
               + bcs.qp_quality_shift(m_q, t_fix, f_nom)
               + 1.0 / qqq["q_other"])
        for n in ns]
    analysis = {
        "freq_channel": _fit_block(fff),
        "quality_channel": _fit_block(qqq),
        "q_tls0_separation_sigma_dimensionless": dual.separation("q_tls0"),
        "alpha_separation_sigma_dimensionless": dual.separation("alpha"),
    }
    plausibility = {
        "q_tls0_freq_in_band": _in_band(fff["q_tls0"], Q_TLS0_BAND),
        "q_tls0_quality_in_band": _in_band(qqq["q_tls0"], Q_TLS0_BAND),
        "q_tls0_band_dimensionless": list(Q_TLS0_BAND),
    }
    curves = {
        "temperature_k": list(map(float, temps)),
        "f0_model_hz": list(map(float, f_curve)),
        "q_int_model_temperature_dimensionless": list(map(float,
                                                          q_curve_temp)),
        "photon_number_dimensionless": list(map(float, ns)),
        "q_int_model_power_dimensionless": list(map(float, q_curve_power)),
    }
    return analysis, plausibility, curves


def _analyze_field(manifest, records):
    quad = fit_field_quadratic(records)
    features = detect_esr(records)
    fields = [r.parallel_field for r in records]
    curve = [quad["f0_zero_hz"] - quad["c2_hz_per_t2"] * b * b
             for b in fields]
    feature_rows = []
    for ft in features:
        g_implied = CONST.h * ft.f0 / (CONST.muB * ft.b_dip)
        feature_rows.append({
            "b_dip_t": ft.b_dip,
            "f0_hz": ft.f0,
            "dip_depth_dimensionless": ft.dip_depth,
            "implied_g_dimensionless": g_implied,
            "implied_g_in_band": _in_band(g_implied, G_FACTOR_BAND),
        })
    analysis = {
        "quadratic": _fit_block(quad, residual_unit="hz2"),
        "esr_features": feature_rows,
    }
    plausibility = {"g_factor_band_dimensionless": list(G_FACTOR_BAND)}
    if len(features) >= 2:
        zee = fit_zeeman(features)
        analysis["zeeman"] = _fit_block(zee, residual_unit="j2")
        plausibility["g_factor_in_band"] = _in_band(zee["g_factor"],
                                                    G_FACTOR_BAND)
    curves = {
        "parallel_field_t": list(map(float, fields)),
        "f0_model_hz": list(map(float, curve)),
    }
    return analysis, plausibility, curves


def run_pipeline(manifest: io.SweepManifest, threads: int = 1) -> dict:
    """Fit all traces, run the matching sweep analysis, build the report."""
    report = {
        "device": manifest.device,
        "resonator": manifest.resonator,
        "kind": manifest.kind,
        "attenuation_db": manifest.attenuation_db,
    }
    if manifest.kind == "combined":
        fits_t, fails_t = _fit_group(manifest, manifest.groups["temp"],
                                     threads)
        fits_p, fails_p = _fit_group(manifest, manifest.groups["power"],
                                     threads)
        rows_t, failed_t = _trace_report_rows(manifest.groups["temp"],
                                              fits_t, fails_t)
        rows_p, failed_p = _trace_report_rows(manifest.groups["power"],
                                              fits_p, fails_p)
        report["traces"] = {"temp": rows_t, "power": rows_p}
        report["failed_traces"] = failed_t + failed_p
        rec_t = _records_from_fits(manifest, manifest.groups["temp"], fits_t,
                                   "temp")
        rec_p = _records_from_fits(manifest, manifest.groups["power"],
                                   fits_p, "power")
        analysis, plausibility, curves = _analyze_combined(manifest, rec_t,
                                                           rec_p)
    else:
        points = manifest.points
        fits, fails = _fit_group(manifest, points, threads)
        rows, failed = _trace_report_rows(points, fits, fails)
        report["traces"] = rows
        report["failed_traces"] = failed
        if manifest.kind == "trace":
            analysis, plausibility, curves = {}, {}, {}
        else:
            records = _records_from_fits(manifest, points, fits, "point")
            if manifest.kind == "temperature":
                analysis, plausibility, curves = _analyze_temperature(
                    manifest, records)
            elif manifest.kind == "power":
                analysis, plausibility, curves = _analyze_power(manifest,
                                                                records)
            elif manifest.kind == "field":
                analysis, plausibility, curves = _analyze_field(manifest,
                                                                records)
            else:
                raise ValueError(
                    f"manifest kind {manifest.kind!r} has no pipeline")
    report["analysis"] = analysis
    report["plausibility"] = plausibility
    report["curves"] = curves
    return report


# --- synth ----------------------------------------------------------------

def _truth_from_manifest(manifest: io.SweepManifest, seed) -> GroundTruth:
    fx = manifest.fixed
    s11 = S11Model(
        f0=float(fx.get("f0_hz", 5e9)),
        q_int=float(fx.get("q_int", 1e5)),
        q_e_mag=float(fx.get("q_e_mag", 2e4)),
        phi=float(fx.get("phi_rad", 0.0)),
        a=float(fx.get("a", 1.0)),
        theta=float(fx.get("theta_rad", 0.0)),
        tau=float(fx.get("tau_s", 0.0)))
    material = MaterialModel(
        tc=float(fx.get("tc_k", 8.0)),
        alpha=float(fx.get("alpha", 0.05)))
    tls_p = TlsParams(
        q_tls0=float(fx.get("q_tls0", math.inf)),
        n_c=float(fx.get("n_c", 1.0)),
        beta=float(fx.get("beta", 0.3)),
        sat_scale_d=float(fx.get("sat_d", 1.0)),
        beta1=float(fx.get("beta1", 1.0)),
        beta2=float(fx.get("beta2", 1.0)),
        q_other=float(fx.get("q_other", math.inf)))
    field = FieldTruth(
        c2=float(fx.get("c2_hz_per_t2", 5e7)),
        vortex_onset=float(fx.get("vortex_onset_t", 0.9)),
        collapse_rate=float(fx.get("collapse_rate", 60.0)),
        esr_g=float(fx.get("esr_g", 1.97)),
        esr_depth=float(fx.get("esr_depth", 0.5)),
        esr_width=float(fx.get("esr_width_t", 0.008)))
    noise = NoiseSpec(
        complex_sigma=float(fx.get("complex_sigma", 0.0)),
        q_int_rel_sigma=float(fx.get("q_int_rel_sigma", 0.0)),
        f0_rel_sigma=float(fx.get("f0_rel_sigma", 0.0)))
    if seed is None:
        seed = int(fx.get("seed", 0))
    return GroundTruth(s11=s11, material=material, tls=tls_p, field=field,
                       noise=noise, seed=int(seed))


def _synth_grid(manifest: io.SweepManifest, gt: GroundTruth):
    fx = manifest.fixed
    kind = str(fx.get("sweep", "trace"))
    if kind == "temperature":
        lo = float(fx.get("grid_min_k", 0.05 * gt.material.tc))
        hi = float(fx.get("grid_max_k", 0.40 * gt.material.tc))
        count = int(fx.get("grid_count", 12))
        return kind, np.linspace(lo, hi, count)
    if kind == "power":
        lo = float(fx.get("grid_min_photons", 1e-2))
        hi = float(fx.get("grid_max_photons", 1e5))
        count = int(fx.get("grid_count", 15))
        return kind, np.logspace(math.log10(lo), math.log10(hi), count)
    if kind == "field":
        lo = float(fx.get("grid_min_t", 0.0))
        hi = float(fx.get("grid_max_t", 1.05))
        count = int(fx.get("grid_count", 106))
        return kind, np.linspace(lo, hi, count)
    if kind == "trace":
        return kind, None
    raise ValueError(f"unknown synth sweep kind {kind!r}")


def _power_dbm_for(n_phot: float, model: S11Model,
                   attenuation_db: float) -> float:
    """Drive power that produces n_phot photons in a given resonance."""
    omega0 = 2.0 * math.pi * model.f0
    p_watt = n_phot * model.q_e_mag * CONST.hbar * omega0**2 \
        / (2.0 * model.q_loaded**2)
    return 10.0 * math.log10(p_watt) + 30.0 + attenuation_db


def cmd_synth(args) -> int:
    manifest = io.load_manifest(args.manifest, check_files=False)
    if manifest.kind != "synth":
        raise ValueError("synth needs a manifest with `kind = synth` plus "
                         "a `sweep = ...` selector")
    gt = _truth_from_manifest(manifest, args.seed)
    out_dir = args.out or "synth_out"
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)
    kind, grid = _synth_grid(manifest, gt)
    fx = manifest.fixed
    n_points = int(fx.get("trace_points", 801))
    span = float(fx.get("trace_span_linewidths", 12.0))
    atten = manifest.attenuation_db
    entries = {
        "device": manifest.device or "synth",
        "resonator": manifest.resonator or "R0",
        "attenuation_db": atten,
    }

    def emit_point(i, model, extra_condition):
        gt_i = dataclasses.replace(gt, s11=model, seed=gt.seed + i + 1)
        fgrid = default_frequency_grid(model, n_points=n_points,
                                       span_linewidths=span)
        spec = synth_trace(gt_i, fgrid)
        fname = os.path.join("traces", f"point_{i:03d}.csv")
        io.write_trace(os.path.join(out_dir, fname), spec)
        entries[f"point_{i:03d}_file"] = fname
        for key, val in extra_condition.items():
            entries[f"point_{i:03d}_{key}"] = val

    if kind == "trace":
        entries["kind"] = "trace"
        gt_0 = dataclasses.replace(gt, seed=gt.seed + 1)
        fgrid = default_frequency_grid(gt.s11, n_points=n_points,
                                       span_linewidths=span)
        fname = os.path.join("traces", "point_000.csv")
        io.write_trace(os.path.join(out_dir, fname),
                       synth_trace(gt_0, fgrid))
        entries["trace_file"] = fname
    else:
        entries["kind"] = kind
        noiseless = dataclasses.replace(gt, noise=NoiseSpec())
        if kind == "temperature":
            n_readout = float(fx.get("photon_number", 0.0))
            recs = synth_sweep(noiseless, "temperature", grid,
                               photon_number=n_readout)
            entries["readout_photon_number"] = n_readout
            for i, (t, rec) in enumerate(zip(grid, recs)):
                model = dataclasses.replace(gt.s11, f0=rec.f0,
                                            q_int=rec.q_int)
                emit_point(i, model, {"temperature_k": float(t)})
        elif kind == "power":
            t_fix = float(fx.get("temperature_k", 0.060))
            recs = synth_sweep(noiseless, "power", grid, temperature=t_fix,
                               power_model=str(fx.get("power_model",
                                                      "saturation")))
            entries["temperature_k"] = t_fix
            for i, (n, rec) in enumerate(zip(grid, recs)):
                model = dataclasses.replace(gt.s11, f0=rec.f0,
                                            q_int=rec.q_int)
                emit_point(i, model, {
                    "power_dbm": _power_dbm_for(float(n), model, atten)})
        else:
            recs = synth_sweep(noiseless, "field", grid)
            for i, (bval, rec) in enumerate(zip(grid, recs)):
                model = dataclasses.replace(gt.s11, f0=rec.f0,
                                            q_int=rec.q_int)
                emit_point(i, model, {"field_t": float(bval)})

    # guesses seeded from truth so the emitted manifest is self-sufficient
    entries["tc_guess_k"] = gt.material.tc
    entries["alpha_guess"] = gt.material.alpha
    if math.isfinite(gt.tls.q_tls0):
        entries["q_tls0_guess"] = gt.tls.q_tls0
        entries["n_c_guess"] = gt.tls.n_c
        entries["beta_guess"] = gt.tls.beta
        entries["sat_d_guess"] = gt.tls.sat_scale_d
        entries["beta1_guess"] = gt.tls.beta1
        entries["beta2_guess"] = gt.tls.beta2
        if math.isfinite(gt.tls.q_other):
            entries["q_other_guess"] = gt.tls.q_other
    io.write_manifest(os.path.join(out_dir, "manifest.kv"), entries)
    truth = {
        "seed_dimensionless": gt.seed,
        "s11": {_suffixed(k): float(v) for k, v in
                dataclasses.asdict(gt.s11).items()},
        "material": {"tc_k": gt.material.tc,
                     "alpha_dimensionless": gt.material.alpha},
        "tls": {_suffixed(k): float(v) for k, v in
                dataclasses.asdict(gt.tls).items()},
        "field": {_suffixed(k): float(v) for k, v in
                  dataclasses.asdict(gt.field).items()},
        "noise": {_suffixed(k): float(v) for k, v in
                  dataclasses.asdict(gt.noise).items()},
    }
    with open(os.path.join(out_dir, "truth.json"), "w",
              encoding="utf-8") as fh:
        fh.write(io.emit_json(truth))
    print(os.path.join(out_dir, "manifest.kv"))
    return EXIT_OK


# --- design ---------------------------------------------------------------

def cmd_design(args) -> int:
    manifest = io.load_manifest(args.manifest, check_files=False)
    if manifest.kind != "design":
        raise ValueError("design needs a manifest with `kind = design`")
    fx = manifest.fixed
    m = MaterialModel(tc=float(fx.get("tc_k", 8.0)),
                      alpha=float(fx.get("alpha", 0.0)),
                      eps_eff=float(fx.get("eps_eff", 6.35)))
    pitch = float(fx["pitch_m"])
    wire = float(fx["wire_width_m"])
    fg_miss = 0.0
    if "target_fg_hz" in fx and "target_lg_h" in fx:
        geometry, fg_miss = design.solve_geometry_joint(
            float(fx["target_fg_hz"]), float(fx["target_lg_h"]), pitch,
            wire, m)
    elif "target_fg_hz" in fx:
        geometry, fg_miss = design.solve_geometry(
            float(fx["target_fg_hz"]), pitch, wire,
            float(fx["inner_diameter_m"]), m)
    else:
        geometry = SpiralGeometry(pitch=pitch, wire_width=wire,
                                  turns=int(float(fx["turns"])),
                                  inner_diameter=float(
                                      fx["inner_diameter_m"]))
    summary = design.design_summary(geometry, m)
    report = {
        "geometry": {
            "pitch_m": geometry.pitch,
            "wire_width_m": geometry.wire_width,
            "turns_dimensionless": geometry.turns,
            "inner_diameter_m": geometry.inner_diameter,
            "outer_diameter_m": geometry.outer_diameter,
            "fill_ratio_dimensionless": geometry.fill_ratio,
        },
        "geometric_inductance_h": summary.lg,
        "design_frequency_hz": summary.fg,
        "characteristic_impedance_ohm": summary.zc,
        "kinetic_inductance_h": summary.lk,
        "predicted_f0_hz": summary.f0_predicted,
        "target_miss_dimensionless": fg_miss,
        "material": {"tc_k": m.tc, "alpha_dimensionless": m.alpha,
                     "eps_eff_dimensionless": m.eps_eff},
    }
    _write_report(report, args.out)
    return EXIT_OK


# --- shared command plumbing ----------------------------------------------

def _write_report(report: dict, out) -> None:
    text = io.emit_json(report)
    if out:
        parent = os.path.dirname(os.path.abspath(out))
        os.makedirs(parent, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pipeline_command(expected_kind):
    def handler(args) -> int:
        manifest = io.load_manifest(args.manifest)
        if expected_kind is not None and manifest.kind != expected_kind:
            raise ValueError(
                f"this command expects a {expected_kind!r} manifest, "
                f"got {manifest.kind!r}")
        report = run_pipeline(manifest, threads=args.threads)
        _write_report(report, args.out)
        return EXIT_OK
    return handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiralres",
        description="High-impedance spiral resonator design and "
                    "measurement analysis")
    sub = parser.add_subparsers(dest="command")
    specs = [
        ("design", cmd_design, "geometry to L, f, Z (or inverse solve)"),
        ("fit-trace", _pipeline_command("trace"),
         "fit one reflection trace"),
        ("fit-temp", _pipeline_command("temperature"),
         "temperature sweep: alpha and Tc from both channels"),
        ("fit-power", _pipeline_command("power"),
         "power sweep: saturable TLS loss"),
        ("fit-combined", _pipeline_command("combined"),
         "joint TLS + quasiparticle fit of both sweeps"),
        ("fit-field", _pipeline_command("field"),
         "field sweep: quadratic shift, vortex onset, ESR"),
        ("synth", cmd_synth, "generate a synthetic dataset"),
        ("report", _pipeline_command(None),
         "full pipeline on any sweep manifest"),
    ]
    for name, handler, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", required=True,
                       help="flat key-value manifest file")
        p.add_argument("--out", default=None,
                       help="output path (report JSON, or synth directory)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the manifest seed (synth only)")
        p.add_argument("--tolerance", type=float, default=None,
                       help="integration tolerance inside sweep fitters")
        p.add_argument("--threads", type=int, default=1,
                       help="concurrent trace fits")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    if getattr(args, "tolerance", None):
        if args.tolerance <= 0:
            print("error: --tolerance must be positive", file=sys.stderr)
            return EXIT_VALIDATION
        sweeps.FIT_RTOL = args.tolerance
    try:
        return args.handler(args)
    except (ParseError, UnitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NoConvergence, NoDipFound, DegenerateSaturation,
            PrefixTooShort) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (GeometryError, ModelDomainError, InsufficientSpan,
            InsufficientFeatures, BoundsViolation, ValueError,
            KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
