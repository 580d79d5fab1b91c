"""
Run Manifest - record of one command-line run, written atomically at the end
"""

import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List

from config import APP_NAME, APP_VERSION, MANIFEST_FILENAME
from src.utils.file_utils import file_sha256, write_json


@dataclass
class RunManifest:
    command: str
    config: Dict
    inputs: Dict[str, str] = field(default_factory=dict)  # path -> sha256
    outputs: List[str] = field(default_factory=list)
    duration_seconds: float = 0.0
    tool: str = APP_NAME
    version: str = APP_VERSION

    def add_input(self, path):
        self.inputs[path] = file_sha256(path)

    def add_output(self, path):
        self.outputs.append(os.path.basename(path))


def write_manifest(out_dir, manifest):
    """Write manifest.json into out_dir and return its path."""
    path = os.path.join(out_dir, MANIFEST_FILENAME)
    payload = asdict(manifest)
    payload["outputs"] = sorted(payload["outputs"])
    write_json(path, payload)
    return path
