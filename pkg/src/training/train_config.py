"""
Training Configuration
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from config import DEFAULT_POOLING, GLOBAL_LOSS_WEIGHT, TRAIN_DEFAULTS
from src.augment.text_augmenter import AugmentConfig


class TrainConfig(BaseModel):
    """
    Optimization schedule, loss toggles and Adam settings.

    The global-loss weight is stored as `lam` and read/written as `lambda`.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    epochs: int = Field(default=TRAIN_DEFAULTS["epochs"], ge=0)
    batch_size: int = Field(default=TRAIN_DEFAULTS["batch_size"], ge=1)
    learning_rate: float = Field(default=TRAIN_DEFAULTS["learning_rate"], ge=0.0)
    lam: float = Field(default=GLOBAL_LOSS_WEIGHT, ge=0.0, alias="lambda")
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    enable_global_loss: bool = True
    enable_augment: bool = True
    pooling: Literal["mean", "positional"] = DEFAULT_POOLING
    global_text_source: Literal["augmented", "raw"] = "augmented"
    seed: int = Field(default=TRAIN_DEFAULTS["seed"], ge=0)
    beta1: float = Field(default=TRAIN_DEFAULTS["beta1"], ge=0.0, lt=1.0)
    beta2: float = Field(default=TRAIN_DEFAULTS["beta2"], ge=0.0, lt=1.0)
    adam_eps: float = Field(default=TRAIN_DEFAULTS["adam_eps"], gt=0.0)
    clip_norm: Optional[float] = Field(default=TRAIN_DEFAULTS["clip_norm"], gt=0.0)
    max_steps: Optional[int] = Field(default=None, ge=1)
    snapshot_patients: int = Field(default=TRAIN_DEFAULTS["snapshot_patients"], ge=0)

    @property
    def effective_lambda(self):
        """Weight actually applied to the global loss (0 when it is disabled)."""
        return self.lam if self.enable_global_loss else 0.0
