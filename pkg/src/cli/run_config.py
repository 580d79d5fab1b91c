"""
Run Configuration - TOML config file plus command-line overrides

File layout:
    seed = 1            # optional, applies to [cohort] and [train]
    out = "runs/demo"   # optional output directory
    [cohort]            # CohortConfig fields
    [train]             # TrainConfig fields ("lambda" for the global-loss weight)
    [train.augment]     # AugmentConfig fields
    [eval]              # EvalConfig fields
"""

import copy
from typing import Optional

import toml
from pydantic import BaseModel, ConfigDict, Field

from config import DEFAULT_OUTPUT_DIR
from src.cohort.models import CohortConfig
from src.evaluation.report import EvalConfig
from src.training.train_config import TrainConfig
from src.utils.errors import ConfigError


class RunConfig(BaseModel):
    """Effective configuration of one command-line run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: Optional[int] = Field(default=None, ge=0)
    out: str = DEFAULT_OUTPUT_DIR
    cohort: CohortConfig = Field(default_factory=CohortConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    def to_toml(self):
        return toml.dumps(self.model_dump(by_alias=True, exclude_none=True))

    def to_dict(self):
        return self.model_dump(by_alias=True, exclude_none=True)


def read_config_file(path):
    """
    Parse a TOML config file.

    Raises:
        ConfigError: If the file is not valid TOML
    """
    try:
        return toml.load(path)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"{path}: invalid TOML ({e})")


def resolve_run_config(path=None, seed=None, out=None, train_overrides=None, eval_overrides=None):
    """
    Merge the config file, global flags and per-command overrides.

    Flags win over the file; a global seed is copied into the cohort and train sections.

    Returns:
        RunConfig

    Raises:
        ConfigError: On unreadable TOML
        pydantic.ValidationError: On invalid values
    """
    data = copy.deepcopy(read_config_file(path)) if path else {}
    if seed is not None:
        data["seed"] = seed
    if out is not None:
        data["out"] = out
    if data.get("seed") is not None:
        data.setdefault("cohort", {})["seed"] = data["seed"]
        data.setdefault("train", {})["seed"] = data["seed"]
    for section, overrides in (("train", train_overrides), ("eval", eval_overrides)):
        for key, value in (overrides or {}).items():
            if value is not None:
                data.setdefault(section, {})[key] = value
    return RunConfig.model_validate(data)
