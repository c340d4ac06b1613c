"""CSV/JSON readers and writers with a reproducibility header."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


class DataFormatError(ValueError):
    """A data file could not be parsed; carries the file and line."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def header_lines(config: dict, **meta) -> list[str]:
    lines = [f"# superradiance {__version__}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {meta[key]}")
    lines.append(f"# config: {canonical_json(config)}")
    return lines


def write_csv(path, columns: list[str], rows, config: dict, **meta) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = header_lines(config, **meta)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    path.write_text("\n".join(out) + "\n")
    return path


def write_trace_csv(path, times, values, config: dict, **meta) -> Path:
    return write_csv(path, ["time_ns", "value"], zip(times, values), config, **meta)


def write_json(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"tool": "superradiance", "version": __version__, "config": config, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n")
    return path


def read_header(path) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = value.strip()
    return meta


def read_trace_csv(path):
    """Read ``time, value[, error]`` rows; returns (times, values, errors or None, header)."""
    path = Path(path)
    times, values, errors = [], [], []
    have_err = None
    with open(path) as fh:
        lines = fh.read().splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            if not times and not any(_is_number(p) for p in parts):
                continue  # column-name row
            raise DataFormatError(path, lineno, f"non-numeric field in {raw!r}") from None
        if len(nums) not in (2, 3):
            raise DataFormatError(path, lineno, f"expected 2 or 3 columns, got {len(nums)}")
        if have_err is None:
            have_err = len(nums) == 3
        elif have_err != (len(nums) == 3):
            raise DataFormatError(path, lineno, "inconsistent column count")
        if not all(math.isfinite(v) for v in nums):
            raise DataFormatError(path, lineno, "non-finite value")
        times.append(nums[0])
        values.append(nums[1])
        if have_err:
            errors.append(nums[2])
    if not times:
        raise DataFormatError(path, len(lines), "no data rows")
    return np.array(times), np.array(values), (np.array(errors) if have_err else None), read_header(path)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
