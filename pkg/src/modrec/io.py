"""File formats: raw IQ captures, config text, CSV and manifest output."""

from __future__ import annotations

import hashlib
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFileError

# One IQ sample record: two little-endian 32-bit floats (I then Q).
IQ_RECORD_BYTES = 8

_ANGLE_RE = re.compile(r"^([0-9.]*)\s*pi\s*(?:/\s*([0-9.]+))?$")

CONFIG_KEYS = (
    "classes",
    "snr_grid_db",
    "n_trials_per_class",
    "frame_length",
    "phase_offset",
    "freq_offset",
    "channel",
    "symbol_rate",
    "path_delays",
    "path_gains_db",
    "max_doppler",
    "rician_k_db",
    "thresholds",
    "fusion",
    "master_seed",
)


def fmt17(value: float) -> str:
    """Decimal text with 17 significant digits (round-trips float64 exactly)."""
    return "%.17g" % float(value)


def read_iq(path) -> np.ndarray:
    """Load a raw little-endian float32 interleaved I/Q capture.

    Rejects files whose size is not a whole number of 8-byte records and
    files containing non-finite values, reporting the byte offset of the
    first offending byte.
    """
    raw = Path(path).read_bytes()
    extra = len(raw) % IQ_RECORD_BYTES
    if extra:
        raise DataFileError(f"{path}: truncated IQ file, {len(raw)} bytes is not "
                            f"a multiple of {IQ_RECORD_BYTES}", byte_offset=len(raw) - extra)
    floats = np.frombuffer(raw, dtype="<f4")
    bad = ~np.isfinite(floats)
    if bad.any():
        first = int(np.argmax(bad))
        raise DataFileError(f"{path}: non-finite sample value", byte_offset=4 * first)
    return floats[0::2].astype(np.float64) + 1j * floats[1::2].astype(np.float64)


def write_iq(path, samples) -> None:
    """Write complex samples as raw little-endian float32 interleaved I/Q."""
    y = np.asarray(samples, dtype=complex).ravel()
    out = np.empty(2 * y.size, dtype="<f4")
    out[0::2] = y.real
    out[1::2] = y.imag
    Path(path).write_bytes(out.tobytes())


def parse_angle(text: str) -> float:
    """Parse an angle in radians; accepts plain numbers and 'pi' forms.

    'pi/6' -> pi/6, '0.5pi' -> pi/2, '2pi/3' -> 2*pi/3, '0.7' -> 0.7 rad.
    """
    s = text.strip().lower().replace(" ", "")
    m = _ANGLE_RE.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    return float(s)


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse an SNR grid: 'lo:hi:step' (hi inclusive) or a comma list."""
    s = text.strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"bad grid range {text!r}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(lo + i * step for i in range(count))
    return tuple(float(p) for p in s.split(","))


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p.strip()) for p in text.split(","))


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p.strip()) for p in text.split(","))


def parse_config(path) -> dict:
    """Parse a flat `key = value` config file into typed values.

    Comments start with '#'; every key is optional; unknown keys are
    rejected with the offending line number. The 'thresholds' value, when
    it is a path, is resolved relative to the config file's directory.
    """
    path = Path(path)
    values: dict = {}
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        try:
            values[key] = _convert(key, val, path.parent)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from exc
    return values


def _convert(key: str, val: str, base_dir: Path):
    if key == "classes":
        return _parse_int_list(val)
    if key == "snr_grid_db":
        return parse_grid(val)
    if key in ("n_trials_per_class", "master_seed"):
        return int(val)
    if key == "frame_length":
        lengths = _parse_int_list(val)
        return lengths[0] if len(lengths) == 1 else lengths
    if key == "phase_offset":
        return parse_angle(val)
    if key in ("freq_offset", "symbol_rate", "max_doppler", "rician_k_db"):
        return float(val)
    if key in ("path_delays", "path_gains_db"):
        return _parse_float_list(val)
    if key == "channel":
        if val not in ("awgn_only", "rician", "rayleigh"):
            raise ValueError(f"must be awgn_only, rician or rayleigh, got {val!r}")
        return val
    if key == "fusion":
        if val not in ("plurality", "oracle_or"):
            raise ValueError(f"must be plurality or oracle_or, got {val!r}")
        return val
    if key == "thresholds":
        return val if val == "table1" else str((base_dir / val).resolve())
    raise AssertionError(f"unhandled key {key}")


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, *, config_echo: dict, master_seed: int,
                   started: str, finished: str, outputs: dict) -> None:
    """Write the run manifest: resolved config, version, seed and digests."""
    from . import __version__
    doc = {
        "tool": "modrec",
        "version": __version__,
        "master_seed": master_seed,
        "config": config_echo,
        "started_utc": started,
        "finished_utc": finished,
        "outputs": {name: sha256_of(p) for name, p in outputs.items()},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
