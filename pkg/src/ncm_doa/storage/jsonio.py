"""JSON and JSON-lines persistence helpers."""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import ConfigLoadError, ConfigWriteError
from .atomic import atomic_path

logger = logging.getLogger(__name__)


def _default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(data: Any) -> str:
    """Serialize ``data`` deterministically, accepting numpy scalars and arrays."""
    return json.dumps(data, default=_default, sort_keys=True, allow_nan=True)


def read_json(path: Path, *, error: type[Exception] = ConfigLoadError) -> Any:
    """Read a JSON document.

    Args:
        path: File to read.
        error: Exception class raised on failure.

    Returns:
        Any: Decoded document.

    Raises:
        ConfigLoadError: If the file is missing or not valid JSON (or ``error``).
            This wraps OSError, UnicodeDecodeError, json.JSONDecodeError.
    """
    path = Path(path)
    logger.debug(f"Reading JSON from {path}")
    if not path.exists():
        raise error(f"File not found at {path}")
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return json.load(fp)
    except Exception as e:
        raise error(f"An error occurred: {e}") from e


def write_json(
    path: Path, data: Any, *, error: type[Exception] = ConfigWriteError
) -> None:
    """Atomically write a JSON document with sorted keys and indentation.

    Raises:
        ConfigWriteError: If serialization or writing fails (or ``error``).
    """
    try:
        text = json.dumps(data, default=_default, sort_keys=True, indent=2)
        with atomic_path(Path(path)) as temporary:
            temporary.write_text(text + "\n", encoding="utf-8")
    except Exception as e:
        raise error(f"An error occurred: {e}") from e


def write_json_lines(
    path: Path, records: list[dict], *, error: type[Exception] = ConfigWriteError
) -> None:
    """Atomically write one JSON object per line.

    Raises:
        ConfigWriteError: If serialization or writing fails (or ``error``).
    """
    try:
        with atomic_path(Path(path)) as temporary:
            with open(temporary, "w", encoding="utf-8") as fp:
                for record in records:
                    fp.write(dumps(record) + "\n")
    except Exception as e:
        raise error(f"An error occurred: {e}") from e


def read_json_lines(
    path: Path, *, error: type[Exception] = ConfigLoadError
) -> list[dict]:
    """Read a JSON-lines file, skipping blank lines.

    Raises:
        ConfigLoadError: If the file is missing or a line is malformed (or ``error``).
    """
    path = Path(path)
    if not path.exists():
        raise error(f"File not found at {path}")
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return [json.loads(line) for line in fp if line.strip()]
    except Exception as e:
        raise error(f"An error occurred: {e}") from e


__all__ = ["dumps", "read_json", "read_json_lines", "write_json", "write_json_lines"]
