"""
Small shared fixtures for the test suite.
"""

import numpy as np

from src.cohort.models import CohortConfig
from src.training.train_config import TrainConfig


def tiny_cohort_config(**overrides):
    """A cohort small enough to train in well under a second."""
    values = dict(
        n_anatomies=2,
        embed_dim=8,
        n_patients=8,
        tokens_per_anatomy=2,
        sentences_normal=4,
        sentences_abnormal=2,
        sentences_per_report=3,
        abnormal_rate=0.5,
        missing_rate=0.0,
        pathology_offset_scale=0.5,
        sentence_noise_ratio=1.0,
        n_templates=3,
        template_noise_scale=0.1,
        seed=3,
    )
    values.update(overrides)
    return CohortConfig(**values)


def tiny_train_config(**overrides):
    values = dict(epochs=1, batch_size=4, learning_rate=1e-2, snapshot_patients=8, seed=5)
    values.update(overrides)
    return TrainConfig(**values)


def unit(*values):
    vector = np.array(values, dtype=np.float64)
    return vector / np.linalg.norm(vector)


def basis(dim, index):
    return np.eye(dim)[index]
