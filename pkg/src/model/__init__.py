"""
Model Module
Learnable parameters, checkpoint files and the toy visual/text encoders.
"""
from src.model.params import ModelParams, query_name, read_checkpoint, write_checkpoint
from src.model.encoders import (
    aggregate_visual,
    attention,
    embed_report,
    embed_visual,
    encode_report,
    pooling_weights,
    temperature,
)

__all__ = [
    'ModelParams',
    'query_name',
    'read_checkpoint',
    'write_checkpoint',
    'aggregate_visual',
    'attention',
    'embed_report',
    'embed_visual',
    'encode_report',
    'pooling_weights',
    'temperature',
]
