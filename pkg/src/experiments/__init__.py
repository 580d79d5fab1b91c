"""
Experiments Module
Scripted multi-run experiments: the component ablation and the gradient-check suite.
"""
from src.experiments.ablation import ABLATION_HEADER, ablation_columns, ablation_csv, ablation_row, run_ablation
from src.experiments.gradient_check import GradcheckCase, GradcheckResult, random_objective, run_gradcheck

__all__ = [
    'ABLATION_HEADER',
    'ablation_columns',
    'ablation_csv',
    'ablation_row',
    'run_ablation',
    'GradcheckCase',
    'GradcheckResult',
    'random_objective',
    'run_gradcheck',
]
