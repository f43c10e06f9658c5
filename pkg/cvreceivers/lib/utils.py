"""
Shared helpers: status output, debug switch, config files and result writers.
"""
import csv
import io
import json
import math
import os
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

from dotenv import dotenv_values

# Significant digits for every serialized number
SIG_DIGITS = 12

_DEBUG_MODE = False


def set_debug(enabled: bool) -> None:
    """Turn debug output on or off for the running process."""
    global _DEBUG_MODE
    _DEBUG_MODE = bool(enabled)


def debug(message: str) -> None:
    """Print a debug line to stderr when debug mode is on."""
    if _DEBUG_MODE:
        print(f"🔧 {message}", file=sys.stderr)


def status(message: str) -> None:
    print(f"✓ {message}", file=sys.stderr)


def warn(message: str) -> None:
    print(f"⚠️  {message}", file=sys.stderr)


def error(message: str) -> None:
    print(f"❌ {message}", file=sys.stderr)


# Configuration
def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ('1', 'true', 'yes', 'on')


def load_config_file(path: Optional[str]) -> Dict[str, str]:
    """
    Read a key=value config file.

    Only the file itself is consulted; the process environment is left
    untouched.

    Args:
        path: Path to the config file, or None

    Returns:
        Mapping of keys (dashes normalized to underscores) to raw string values

    Raises:
        FileNotFoundError: If a path is given but does not exist
    """
    if not path:
        return {}
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    values = dotenv_values(path)
    return {
        key.strip().lower().replace('-', '_'): value
        for key, value in values.items()
        if value is not None
    }


# Formatting
def format_number(value: float) -> str:
    """Serialize a number with SIG_DIGITS significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{SIG_DIGITS}g}"
    return "0" if text == "-0" else text


def round_sig(value: float) -> float:
    """Round to the serialized precision so JSON round-trips exactly."""
    value = float(value)
    if not math.isfinite(value):
        return value
    return float(format_number(value))


def round_nested(obj: Any) -> Any:
    """Apply round_sig to every float inside lists, tuples and dicts."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {key: round_nested(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_nested(val) for val in obj]
    if hasattr(obj, 'item'):
        return round_nested(obj.item())
    return obj


def compact_json(obj: Any) -> str:
    """Deterministic one-line JSON with rounded floats and sorted keys."""
    return json.dumps(round_nested(obj), sort_keys=True, separators=(',', ':'))


# File System Utilities
def ensure_dir(path: str) -> bool:
    """
    Ensure the parent directory of an output path exists.

    Args:
        path: Output file path

    Returns:
        True if the directory exists or was created, False otherwise
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        return True
    except OSError as e:
        error(f"Error creating directory {directory}: {e}")
        return False


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with numbers at SIG_DIGITS precision."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            format_number(cell) if isinstance(cell, float) else cell
            for cell in row
        ])
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Write rows to a CSV file with numbers at SIG_DIGITS precision.

    Returns:
        The path written
    """
    ensure_dir(path)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        f.write(csv_text(header, rows))
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def write_json(path: str, obj: Any) -> str:
    """Write indented, key-sorted JSON with rounded floats."""
    ensure_dir(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(round_nested(obj), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')
    return path
