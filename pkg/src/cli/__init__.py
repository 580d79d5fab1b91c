"""
CLI Module
Run configuration, run manifests and the click command group.
"""
from src.cli.run_config import RunConfig, read_config_file, resolve_run_config
from src.cli.manifest import RunManifest, write_manifest
from src.cli.commands import cli, load_checkpoint, load_cohort

__all__ = [
    'RunConfig',
    'read_config_file',
    'resolve_run_config',
    'RunManifest',
    'write_manifest',
    'cli',
    'load_checkpoint',
    'load_cohort',
]
