"""File I/O for reports: deterministic names, CSV and JSON writers."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .logger import get_logger

log = get_logger("file_io")

FLOAT_FORMAT = "%.17g"


def report_filename(kernel: str, d: int, m: int, study: str, extension: str) -> str:
    """Build ``{kernel}_{d}d_m{m}_{study}.{ext}`` for a report file."""
    return f"{kernel}_{d}d_m{m}_{study}.{extension}"


def format_value(value) -> str:
    """Format one CSV cell; floats keep 17 significant digits."""
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT % value
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    """Write rows to a CSV file with '.' decimals and a fixed line ending."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    log.info(f"Wrote {count} rows to {path}")
    return path


def _to_jsonable(obj):
    """Convert numpy values and containers into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value) or math.isinf(value):
            return format_value(value)
        return value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, data: dict) -> Path:
    """Write a report dictionary as sorted, indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_to_jsonable(data), f, indent=2, sort_keys=True)
        f.write("\n")
    log.info(f"Wrote {path}")
    return path
