"""
Objective Module
Anatomy batches, cross-anatomy recombination and the contrastive loss stack.
"""
from src.objective.batch import AnatomyBatch
from src.objective.recombination import RecombinationPlan, build_recombination_plan, synthesize_global_tokens
from src.objective.losses import (
    LossBreakdown,
    ObjectiveGraph,
    bidirectional_info_nce,
    breakdown_from_tape,
    build_objective,
    global_contrastive_loss,
    local_contrastive_loss,
    total_loss,
)

__all__ = [
    'AnatomyBatch',
    'RecombinationPlan',
    'build_recombination_plan',
    'synthesize_global_tokens',
    'LossBreakdown',
    'ObjectiveGraph',
    'bidirectional_info_nce',
    'breakdown_from_tape',
    'build_objective',
    'global_contrastive_loss',
    'local_contrastive_loss',
    'total_loss',
]
