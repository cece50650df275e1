"""File formats: trace CSV, flat key-value manifests, canonical JSON.

Two trace layouts are accepted, distinguished by their mandatory header
row:

    freq_hz,re,im
    freq_hz,mag_db,phase_rad

Manifests are flat `key = value` text with units spelled out in the key
names (`temperature_k`, `attenuation_db`); `#` starts a comment.  Per
point keys are grouped by prefix:

    point_001_file = traces/t012.csv
    point_001_temperature_k = 0.012

Combined temperature+power manifests use `temp_NNN_` and `power_NNN_`
prefixes instead of `point_NNN_`.

Reports are emitted through a deterministic JSON writer: keys sorted,
floats at 12 significant digits, non-finite numbers as quoted strings,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .core import ComplexSpectrum
from .errors import ParseError, UnitError

__all__ = ["ingest_trace", "write_trace", "parse_manifest_text",
           "load_manifest", "write_manifest", "emit_json", "SweepManifest",
           "ManifestPoint", "TRACE_HEADERS"]

TRACE_HEADERS = {
    "re_im": ("freq_hz", "re", "im"),
    "mag_phase": ("freq_hz", "mag_db", "phase_rad"),
}
MANIFEST_KINDS = ("trace", "temperature", "power", "field", "combined",
                  "design", "synth")
_POINT_KEY = re.compile(r"^(point|temp|power)_(\d+)_(.+)$")


def ingest_trace(path) -> ComplexSpectrum:
    """Read a reflection trace CSV in either accepted layout.

    Rows are sorted by frequency; non-finite numbers, malformed rows,
    and duplicate frequencies raise ParseError with the line number, an
    unrecognized header raises UnitError.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header_line = None
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if header_line is None:
            header_line = (lineno, tuple(c.strip().lower()
                                         for c in text.split(",")))
            continue
        rows.append((lineno, text))
    if header_line is None:
        raise ParseError(f"{path}: no header row found")
    _, header = header_line
    layout = None
    for name, cols in TRACE_HEADERS.items():
        if header == cols:
            layout = name
    if layout is None:
        expected = " or ".join(",".join(c) for c in TRACE_HEADERS.values())
        raise UnitError(
            f"{path}: header {','.join(header)!r} matches neither layout "
            f"({expected})")

    freq = np.empty(len(rows))
    col1 = np.empty(len(rows))
    col2 = np.empty(len(rows))
    for i, (lineno, text) in enumerate(rows):
        parts = text.split(",")
        if len(parts) != 3:
            raise ParseError(f"{path}: expected 3 columns, got {len(parts)}",
                             line=lineno)
        try:
            a, b, c = (float(p) for p in parts)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from None
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
            raise ParseError(f"{path}: non-finite value", line=lineno)
        freq[i], col1[i], col2[i] = a, b, c
    if len(rows) == 0:
        raise ParseError(f"{path}: no data rows")

    order = np.argsort(freq, kind="stable")
    freq, col1, col2 = freq[order], col1[order], col2[order]
    if np.any(np.diff(freq) <= 0):
        dup = int(np.argmin(np.diff(freq)))
        raise ParseError(
            f"{path}: duplicate frequency {freq[dup]!r}",
            line=rows[int(order[dup + 1])][0])
    if layout == "re_im":
        values = col1 + 1j * col2
    else:
        values = 10.0 ** (col1 / 20.0) * np.exp(1j * col2)
    return ComplexSpectrum(frequencies=freq, values=values)


def write_trace(path, spectrum: ComplexSpectrum, layout: str = "re_im"):
    """Write a trace CSV; the re/im layout round-trips bit exactly.

    Floats are written with repr, the shortest string that parses back
    to the same double.
    """
    if layout not in TRACE_HEADERS:
        raise ValueError(f"layout must be one of {tuple(TRACE_HEADERS)}")
    lines = [",".join(TRACE_HEADERS[layout])]
    if layout == "re_im":
        for f, z in zip(spectrum.frequencies, spectrum.values):
            z = complex(z)
            lines.append(f"{float(f)!r},{z.real!r},{z.imag!r}")
    else:
        for f, z in zip(spectrum.frequencies, spectrum.values):
            z = complex(z)
            mag_db = 20.0 * math.log10(abs(z))
            lines.append(f"{float(f)!r},{mag_db!r},"
                         f"{math.atan2(z.imag, z.real)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class ManifestPoint:
    file: str
    condition: dict


@dataclass(frozen=True)
class SweepManifest:
    kind: str
    device: str = ""
    resonator: str = ""
    base_dir: str = "."
    attenuation_db: float = 0.0
    fixed: dict = field(default_factory=dict)
    guesses: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)

    @property
    def points(self) -> list:
        """Points of the single group (non-combined manifests)."""
        if len(self.groups) != 1:
            raise ValueError(
                f"manifest has groups {sorted(self.groups)}, not exactly one")
        return next(iter(self.groups.values()))

    def resolve(self, name: str) -> str:
        return os.path.normpath(os.path.join(self.base_dir, name))


def parse_manifest_text(text: str, base_dir: str = ".",
                        check_files: bool = True) -> SweepManifest:
    """Parse flat key-value manifest text.

    Raises ParseError for malformed lines or missing per-point files and
    ValueError for structural problems (unknown kind, no points, a point
    without a file or condition).
    """
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected `key = value`, got {line!r}",
                             line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ParseError(f"empty key or value in {line!r}", line=lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        pairs[key] = value

    kind = pairs.pop("kind", None)
    if kind not in MANIFEST_KINDS:
        raise ValueError(
            f"manifest kind must be one of {MANIFEST_KINDS}, got {kind!r}")
    device = pairs.pop("device", "")
    resonator = pairs.pop("resonator", "")

    raw_groups: dict = {}
    fixed, guesses = {}, {}
    for key, value in pairs.items():
        m = _POINT_KEY.match(key)
        if m:
            prefix, index, fld = m.group(1), int(m.group(2)), m.group(3)
            raw_groups.setdefault(prefix, {}).setdefault(index, {})[fld] = \
                value
        elif "_guess" in key:
            guesses[key] = _number(key, value)
        else:
            fixed[key] = _number(key, value) if _looks_numeric(value) else \
                value

    attenuation_db = float(fixed.pop("attenuation_db", 0.0))
    groups = {}
    for prefix, by_index in raw_groups.items():
        pts = []
        for index in sorted(by_index):
            fields = by_index[index]
            fname = fields.pop("file", None)
            if fname is None:
                raise ValueError(
                    f"{prefix}_{index:03d} has no `file` entry")
            if not fields:
                raise ValueError(
                    f"{prefix}_{index:03d} declares no condition")
            condition = {k: _number(k, v) for k, v in fields.items()}
            pts.append(ManifestPoint(file=fname, condition=condition))
        groups[prefix] = pts

    if kind == "combined":
        missing = {"temp", "power"} - set(groups)
        if missing:
            raise ValueError(
                f"combined manifest lacks groups: {sorted(missing)}")
    elif kind in ("temperature", "power", "field") and \
            ("point" not in groups or not groups["point"]):
        raise ValueError(f"{kind} manifest has no point_NNN_ entries")
    elif kind == "trace" and "point" not in groups:
        if "trace_file" in fixed:
            groups["point"] = [ManifestPoint(file=str(fixed.pop(
                "trace_file")), condition={})]
        else:
            raise ValueError("trace manifest needs trace_file or a point")

    manifest = SweepManifest(kind=kind, device=device, resonator=resonator,
                             base_dir=base_dir, attenuation_db=attenuation_db,
                             fixed=fixed, guesses=guesses, groups=groups)
    if check_files:
        for pts in groups.values():
            for pt in pts:
                path = manifest.resolve(pt.file)
                if not os.path.exists(path):
                    raise ParseError(f"referenced file missing: {path}")
    return manifest


def load_manifest(path, check_files: bool = True) -> SweepManifest:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_manifest_text(text, base_dir=os.path.dirname(
        os.path.abspath(path)), check_files=check_files)


def write_manifest(path, entries: dict):
    """Write flat key-value lines; floats use repr for exact round-trip."""
    lines = []
    for key, value in entries.items():
        if isinstance(value, (float, np.floating)):
            value = repr(float(value))
        lines.append(f"{key} = {value}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _looks_numeric(value: str) -> bool:
    try:
        float(value)
        return True
    except ValueError:
        return False


def _number(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{key}: expected a number, got {value!r}") \
            from None


# --- canonical JSON -------------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _json_string(s: str) -> str:
    out = []
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def _json_number(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    xf = float(x)
    if math.isnan(xf):
        return '"nan"'
    if math.isinf(xf):
        return '"inf"' if xf > 0 else '"-inf"'
    return f"{xf:.12g}"


def _emit(obj, indent: int, out: list):
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(_json_string(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_json_number(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {key!r}")
            out.append(pad + "  " + _json_string(key) + ": ")
            _emit(obj[key], indent + 1, out)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(items):
            out.append(pad + "  ")
            _emit(item, indent + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_json(obj) -> str:
    """Serialize to canonical JSON text (sorted keys, %.12g floats)."""
    out: list = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)
