"""
Utilities Module
This module contains file helpers and the error types used across the lab.
"""
from src.utils.file_utils import (
    atomic_write_text,
    ensure_directory_exists,
    file_sha256,
    read_json,
    write_json,
)
from src.utils.errors import (
    CheckpointFormatError,
    CohortFormatError,
    ConfigError,
    DegenerateInputError,
    IncompatibleInputsError,
    LabError,
    NumericalAbortError,
    ShapeError,
    UnboundParameterError,
)

__all__ = [
    'atomic_write_text',
    'ensure_directory_exists',
    'file_sha256',
    'read_json',
    'write_json',
    'CheckpointFormatError',
    'CohortFormatError',
    'ConfigError',
    'DegenerateInputError',
    'IncompatibleInputsError',
    'LabError',
    'NumericalAbortError',
    'ShapeError',
    'UnboundParameterError',
]
