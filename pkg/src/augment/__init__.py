"""
Augmentation Module
Pinned PRNG and clinical-aware report augmentation.
"""
from src.augment.rng import Rng, derive_seed, splitmix64
from src.augment.text_augmenter import (
    AugmentConfig,
    augment_report,
    join_sentences,
    kept_size_bounds,
    split_sentences,
)

__all__ = [
    'Rng',
    'derive_seed',
    'splitmix64',
    'AugmentConfig',
    'augment_report',
    'join_sentences',
    'kept_size_bounds',
    'split_sentences',
]
