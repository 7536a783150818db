"""Binary+JSON sidecar format for complex matrix stacks.

A matrix file is a pair ``<stem>.bin`` / ``<stem>.json``. The binary part
holds every array back to back as interleaved real/imaginary little-endian
float64 values in C order; the JSON part lists, for every array, its name,
shape and byte offset, plus free-form metadata. Covariance sets, noise
covariance matrices and beamformer weights are all exported this way.
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import MatrixFileLoadError, MatrixFileWriteError
from .atomic import atomic_path
from .jsonio import write_json

logger = logging.getLogger(__name__)

FORMAT_TAG = "ncm-doa/complex128-le"
_DTYPE = np.dtype("<c16")


def _paths(stem: Path) -> tuple[Path, Path]:
    stem = Path(stem)
    if stem.suffix in (".bin", ".json"):
        stem = stem.with_suffix("")
    return stem.with_suffix(".bin"), stem.with_suffix(".json")


def write_matrices(
    stem: Path, arrays: dict[str, np.ndarray], metadata: dict[str, Any] | None = None
) -> tuple[Path, Path]:
    """Write named complex arrays to a ``.bin`` + ``.json`` pair.

    Args:
        stem: Output path without suffix (a ``.bin``/``.json`` suffix is dropped).
        arrays: Arrays to store; real arrays are promoted to complex.
        metadata: Extra JSON-serializable information.

    Returns:
        tuple[Path, Path]: Paths of the binary and JSON files.

    Raises:
        MatrixFileWriteError: If serialization or writing fails.
            This wraps OSError, TypeError, ValueError.
    """
    bin_path, json_path = _paths(stem)
    logger.debug(f"Writing {len(arrays)} arrays to {bin_path}")
    try:
        entries = []
        offset = 0
        blobs = []
        for name, array in arrays.items():
            data = np.ascontiguousarray(array, dtype=_DTYPE)
            blobs.append(data.tobytes())
            entries.append({"name": name, "shape": list(data.shape), "offset": offset})
            offset += data.nbytes
        header = {
            "format": FORMAT_TAG,
            "byte_order": "little",
            "arrays": entries,
            "metadata": metadata or {},
        }
        with atomic_path(bin_path) as temporary:
            with open(temporary, "wb") as fp:
                for blob in blobs:
                    fp.write(blob)
        write_json(json_path, header, error=MatrixFileWriteError)
    except Exception as e:
        raise MatrixFileWriteError(f"An error occurred: {e}") from e
    return bin_path, json_path


def read_matrices(stem: Path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Read arrays written by :func:`write_matrices`.

    Args:
        stem: Path of either file of the pair, or the common stem.

    Returns:
        tuple[dict[str, np.ndarray], dict[str, Any]]: Arrays by name and metadata.

    Raises:
        MatrixFileLoadError: If a file is missing, the format tag is unknown,
            or the binary part is shorter than the header declares.
    """
    bin_path, json_path = _paths(stem)
    logger.debug(f"Reading matrices from {bin_path}")
    for path in (bin_path, json_path):
        if not path.exists():
            raise MatrixFileLoadError(f"File not found at {path}")
    try:
        header = json.loads(json_path.read_text(encoding="utf-8"))
        buffer = bin_path.read_bytes()
    except Exception as e:
        raise MatrixFileLoadError(f"An error occurred: {e}") from e

    if header.get("format") != FORMAT_TAG:
        raise MatrixFileLoadError(f"Unknown matrix format {header.get('format')!r}")

    arrays = {}
    try:
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape, dtype=np.int64))
            end = entry["offset"] + count * _DTYPE.itemsize
            if end > len(buffer):
                raise MatrixFileLoadError(
                    f"Array {entry['name']} extends past the end of {bin_path}"
                )
            arrays[entry["name"]] = (
                np.frombuffer(buffer, dtype=_DTYPE, count=count, offset=entry["offset"])
                .reshape(shape)
                .astype(np.complex128)
            )
    except MatrixFileLoadError:
        raise
    except Exception as e:
        raise MatrixFileLoadError(f"An error occurred: {e}") from e
    return arrays, header.get("metadata", {})


__all__ = ["FORMAT_TAG", "read_matrices", "write_matrices"]
