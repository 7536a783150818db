"""Storage package for on-disk artifacts.

This package provides atomic writers and readers for the files the
pipeline produces: multichannel WAV audio, the binary+JSON complex matrix
sidecars, JSON documents and JSON-lines traces.
"""

from .atomic import atomic_path
from .jsonio import dumps, read_json, read_json_lines, write_json, write_json_lines
from .matrixfile import FORMAT_TAG, read_matrices, write_matrices
from .wavfile import SUPPORTED_SUBTYPES, read_wav, write_wav

__all__ = [
    "FORMAT_TAG",
    "SUPPORTED_SUBTYPES",
    "atomic_path",
    "dumps",
    "read_json",
    "read_json_lines",
    "read_matrices",
    "read_wav",
    "write_json",
    "write_json_lines",
    "write_matrices",
    "write_wav",
]
