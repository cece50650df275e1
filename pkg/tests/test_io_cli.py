"""Trace/manifest I/O, canonical JSON, and the command-line pipeline."""

import json
import math
import os

import numpy as np
import pytest

from spiralres import cli, io
from spiralres.core import ComplexSpectrum
from spiralres.errors import ParseError, UnitError
from spiralres.synth import NoiseSpec, default_frequency_grid, synth_trace

from conftest import make_truth


def _noisy_spectrum(seed=4):
    gt = make_truth(noise=NoiseSpec(complex_sigma=1e-3), seed=seed)
    return synth_trace(gt, default_frequency_grid(gt.s11, 64))


def test_reim_roundtrip_bit_exact(tmp_path):
    spec = _noisy_spectrum()
    path = tmp_path / "trace.csv"
    io.write_trace(path, spec)
    back = io.ingest_trace(path)
    assert np.array_equal(back.frequencies, spec.frequencies)
    assert np.array_equal(back.values, spec.values)


def test_magphase_roundtrip(tmp_path):
    spec = _noisy_spectrum()
    path = tmp_path / "trace.csv"
    io.write_trace(path, spec, layout="mag_phase")
    back = io.ingest_trace(path)
    assert np.allclose(back.values, spec.values, rtol=1e-12, atol=0.0)
    with pytest.raises(ValueError):
        io.write_trace(path, spec, layout="polar")


def test_ingest_sorts_by_frequency(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("freq_hz,re,im\n5e9,1.0,0.0\n4e9,0.5,0.1\n6e9,0.2,0.3\n")
    spec = io.ingest_trace(path)
    assert list(spec.frequencies) == [4e9, 5e9, 6e9]
    assert spec.values[0] == 0.5 + 0.1j


def test_ingest_header_failures(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# only a comment\n\n")
    with pytest.raises(ParseError):
        io.ingest_trace(empty)
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("freq_ghz,re,im\n5.0,1.0,0.0\n")
    with pytest.raises(UnitError):
        io.ingest_trace(wrong)


def test_ingest_row_failures_carry_line_numbers(tmp_path):
    cases = [
        ("freq_hz,re,im\n5e9,1.0\n", 2),            # short row
        ("freq_hz,re,im\n5e9,one,0.0\n", 2),        # not a number
        ("# note\nfreq_hz,re,im\n5e9,1.0,0.0\n5e9,nan,0.0\n", 4),
        ("freq_hz,re,im\n5e9,1.0,0.0\n5e9,0.5,0.1\n", 3),  # duplicate
    ]
    for text, lineno in cases:
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(ParseError) as ei:
            io.ingest_trace(p)
        assert ei.value.line == lineno


MANIFEST = """\
# resonator R3 warm-up
kind = temperature
device = chipA
resonator = R3
attenuation_db = 60
tc_guess_k = 8.1
alpha_guess = 0.03
point_000_file = traces/t000.csv
point_000_temperature_k = 0.1
point_001_file = traces/t001.csv
point_001_temperature_k = 0.25
"""


def test_manifest_parse_fields():
    m = io.parse_manifest_text(MANIFEST, base_dir="/data",
                               check_files=False)
    assert m.kind == "temperature"
    assert m.device == "chipA" and m.resonator == "R3"
    assert m.attenuation_db == 60.0
    assert m.guesses == {"tc_guess_k": 8.1, "alpha_guess": 0.03}
    assert len(m.points) == 2
    assert m.points[1].condition == {"temperature_k": 0.25}
    assert m.resolve(m.points[0].file) == "/data/traces/t000.csv"


def test_manifest_structural_failures():
    with pytest.raises(ParseError):   # malformed line
        io.parse_manifest_text("kind temperature", check_files=False)
    with pytest.raises(ParseError) as ei:
        io.parse_manifest_text("kind = trace\nkind = trace\n",
                               check_files=False)
    assert ei.value.line == 2
    with pytest.raises(ValueError):   # unknown kind
        io.parse_manifest_text("kind = wax", check_files=False)
    with pytest.raises(ValueError):   # no points
        io.parse_manifest_text("kind = temperature", check_files=False)
    with pytest.raises(ValueError):   # point without a file
        io.parse_manifest_text(
            "kind = temperature\npoint_000_temperature_k = 0.1",
            check_files=False)
    with pytest.raises(ValueError):   # point without a condition
        io.parse_manifest_text(
            "kind = temperature\npoint_000_file = a.csv",
            check_files=False)
    with pytest.raises(ValueError):   # combined needs both groups
        io.parse_manifest_text(
            "kind = combined\ntemp_000_file = a.csv\n"
            "temp_000_temperature_k = 0.1", check_files=False)
    with pytest.raises(ParseError):   # non-numeric condition
        io.parse_manifest_text(
            "kind = temperature\npoint_000_file = a.csv\n"
            "point_000_temperature_k = cold", check_files=False)


def test_manifest_trace_file_fallback():
    m = io.parse_manifest_text("kind = trace\ntrace_file = t.csv",
                               check_files=False)
    assert m.points[0].file == "t.csv"
    assert m.points[0].condition == {}


def test_manifest_checks_referenced_files(tmp_path):
    path = tmp_path / "m.kv"
    path.write_text("kind = trace\ntrace_file = missing.csv\n")
    with pytest.raises(ParseError):
        io.load_manifest(path)
    (tmp_path / "missing.csv").write_text("freq_hz,re,im\n5e9,1,0\n")
    m = io.load_manifest(path)
    assert m.base_dir == str(tmp_path)


def test_emit_json_canonical_form():
    obj = {
        "zeta": float("nan"),
        "alpha": 1.0,
        "nested": {"b": [1, 2.5, True, None], "a": "x\"y\n"},
        "wide": 123456789012.345,
        "neg_inf": float("-inf"),
    }
    text = io.emit_json(obj)
    assert text == io.emit_json(obj)  # byte-identical on repeat
    # keys sorted, non-finite numbers quoted, %.12g rendering
    assert text.index('"alpha"') < text.index('"nested"') < \
        text.index('"zeta"')
    assert '"nan"' in text and '"-inf"' in text
    assert "123456789012" in text
    parsed = json.loads(text)
    assert parsed["alpha"] == 1.0
    assert parsed["nested"]["a"] == 'x"y\n'
    assert parsed["nested"]["b"] == [1, 2.5, True, None]


def test_write_manifest_roundtrip(tmp_path):
    path = tmp_path / "m.kv"
    io.write_manifest(path, {"kind": "trace", "trace_file": "t.csv",
                             "attenuation_db": 61.5})
    (tmp_path / "t.csv").write_text("freq_hz,re,im\n5e9,1,0\n")
    m = io.load_manifest(path)
    assert m.kind == "trace"
    assert m.attenuation_db == 61.5


# --- command line ----------------------------------------------------------


def test_cli_requires_subcommand(capsys):
    assert cli.main([]) == cli.EXIT_VALIDATION
    capsys.readouterr()


def test_cli_rejects_bad_tolerance(tmp_path, capsys):
    path = tmp_path / "m.kv"
    path.write_text("kind = trace\ntrace_file = t.csv\n")
    rc = cli.main(["fit-trace", "--manifest", str(path),
                   "--tolerance", "-1"])
    assert rc == cli.EXIT_VALIDATION
    capsys.readouterr()


def test_cli_missing_manifest_is_io_error(tmp_path, capsys):
    rc = cli.main(["fit-trace", "--manifest",
                   str(tmp_path / "nowhere.kv")])
    assert rc == cli.EXIT_IO
    capsys.readouterr()


def test_cli_kind_mismatch(tmp_path, capsys):
    path = tmp_path / "m.kv"
    path.write_text("kind = trace\ntrace_file = t.csv\n")
    (tmp_path / "t.csv").write_text("freq_hz,re,im\n5e9,1,0\n")
    rc = cli.main(["fit-power", "--manifest", str(path)])
    assert rc == cli.EXIT_VALIDATION
    capsys.readouterr()


def _synth_dataset(tmp_path, capsys, extra=""):
    man = tmp_path / "synth.kv"
    man.write_text(
        "kind = synth\n"
        "sweep = temperature\n"
        "f0_hz = 5.95e9\n"
        "q_int = 1.2e5\n"
        "q_e_mag = 2e4\n"
        "tc_k = 8.1\n"
        "alpha = 0.028\n"
        "q_other = 1.5e5\n"
        "photon_number = 5.0\n"
        "grid_count = 12\n"
        "attenuation_db = 60\n"
        + extra)
    out = tmp_path / "data"
    rc = cli.main(["synth", "--manifest", str(man), "--out", str(out),
                   "--seed", "7"])
    capsys.readouterr()
    assert rc == cli.EXIT_OK
    return out / "manifest.kv"


def test_cli_synth_then_fit_recovers_truth(tmp_path, capsys):
    manifest = _synth_dataset(tmp_path, capsys)
    report_path = tmp_path / "report.json"
    rc = cli.main(["fit-temp", "--manifest", str(manifest),
                   "--out", str(report_path)])
    assert rc == cli.EXIT_OK
    report = json.loads(report_path.read_text())
    an = report["analysis"]
    for channel in ("freq_channel", "quality_channel"):
        blk = an[channel]
        assert blk["converged"] is True
        assert blk["params"]["alpha_dimensionless"] == \
            pytest.approx(0.028, rel=0.02)
        assert blk["params"]["tc_k"] == pytest.approx(8.1, rel=0.02)
    assert report["plausibility"]["alpha_freq_in_band"] is True
    assert len(report["traces"]) == 12
    assert report["failed_traces"] == []


def test_cli_thread_count_does_not_change_output(tmp_path, capsys):
    manifest = _synth_dataset(tmp_path, capsys)
    outs = []
    for threads in ("1", "3"):
        path = tmp_path / f"report_{threads}.json"
        rc = cli.main(["fit-temp", "--manifest", str(manifest),
                       "--out", str(path), "--threads", threads])
        assert rc == cli.EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_cli_report_keys_spell_units(tmp_path, capsys):
    manifest = _synth_dataset(tmp_path, capsys)
    report_path = tmp_path / "report.json"
    assert cli.main(["report", "--manifest", str(manifest),
                     "--out", str(report_path)]) == cli.EXIT_OK
    report = json.loads(report_path.read_text())

    def walk(obj, trail):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(v, trail + [k])
        elif isinstance(obj, list):
            for v in obj:
                walk(v, trail)
        elif isinstance(obj, float) and not isinstance(obj, bool):
            key = trail[-1]
            assert key.endswith(cli._UNIT_SUFFIXES), \
                f"numeric key without unit: {'.'.join(trail)}"

    walk(report["analysis"], ["analysis"])
    walk(report["curves"], ["curves"])


def test_cli_design_report(tmp_path, capsys):
    man = tmp_path / "design.kv"
    man.write_text(
        "kind = design\n"
        "pitch_m = 1e-6\n"
        "wire_width_m = 5e-7\n"
        "turns = 43\n"
        "inner_diameter_m = 1e-5\n"
        "tc_k = 8.1\n"
        "alpha = 0.06\n")
    report_path = tmp_path / "design.json"
    rc = cli.main(["design", "--manifest", str(man),
                   "--out", str(report_path)])
    assert rc == cli.EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["geometry"]["turns_dimensionless"] == 43
    assert report["geometry"]["outer_diameter_m"] == pytest.approx(96e-6)
    assert report["characteristic_impedance_ohm"] > 0
    assert report["predicted_f0_hz"] < report["design_frequency_hz"]


def test_cli_fit_failure_maps_to_fit_exit(tmp_path, capsys):
    # a power manifest whose records never leave the low-power plateau
    traces = tmp_path / "traces"
    traces.mkdir()
    gt = make_truth()
    lines = ["kind = power", "attenuation_db = 60",
             "temperature_k = 0.06", "q_tls0_guess = 1e5"]
    for i, pwr in enumerate((-140.0, -120.0, -100.0, -80.0, -60.0)):
        spec = synth_trace(gt, default_frequency_grid(gt.s11, 201))
        fname = f"traces/p{i:03d}.csv"
        io.write_trace(tmp_path / fname, spec)
        lines += [f"point_{i:03d}_file = {fname}",
                  f"point_{i:03d}_power_dbm = {pwr}"]
    man = tmp_path / "m.kv"
    man.write_text("\n".join(lines) + "\n")
    rc = cli.main(["fit-power", "--manifest", str(man)])
    assert rc == cli.EXIT_FIT
    capsys.readouterr()
