"""
File Utilities Module

This module provides utility functions for file operations used by the
command-line runner: directories, checksums, atomic writes and JSON output.
"""

import hashlib
import json
import os
import tempfile


def ensure_directory_exists(directory_path):
    """
    Ensure that a directory exists, creating it if necessary.

    Args:
        directory_path (str): Path to the directory to check/create

    Returns:
        bool: True if the directory exists or was created, False otherwise
    """
    try:
        os.makedirs(directory_path, exist_ok=True)
        return True
    except OSError:
        return False


def file_sha256(path):
    """
    Compute the SHA-256 hex digest of a file.

    Args:
        path (str): File to hash

    Returns:
        str: Hex digest
    """
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path, text):
    """
    Write text to path atomically (temporary file in the same directory, then rename).

    Args:
        path (str): Destination file
        text (str): Content to write
    """
    directory = os.path.dirname(os.path.abspath(path))
    ensure_directory_exists(directory)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_json(path, payload):
    """Write a JSON document with sorted keys so reruns are byte-identical."""
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path):
    """Read a JSON document."""
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
