"""
Training Module
Adam, mini-batch assembly and the deterministic training loop.
"""
from src.training.adam import AdamState, adam_step, clip_by_global_norm, global_norm
from src.training.train_config import TrainConfig
from src.training.batching import encode_batch
from src.training.trainer import TrainTrace, planned_steps, train, train_step

__all__ = [
    'AdamState',
    'adam_step',
    'clip_by_global_norm',
    'global_norm',
    'TrainConfig',
    'encode_batch',
    'TrainTrace',
    'planned_steps',
    'train',
    'train_step',
]
