"""
Numeric Core Module
Dense float64 vector helpers, a reverse-mode autodiff engine and a finite-difference validator.
"""
from src.numeric.vector_ops import cosine_similarity, l2_normalize, log_softmax, pairwise_cosine, softmax
from src.numeric.autodiff import (
    PRIMITIVES,
    DiffExpr,
    GradReport,
    Node,
    Tape,
    constant,
    evaluate_with_gradients,
    forward,
    parameter,
)
from src.numeric.gradcheck import finite_difference_check, validate_gradients

__all__ = [
    'cosine_similarity',
    'l2_normalize',
    'log_softmax',
    'pairwise_cosine',
    'softmax',
    'PRIMITIVES',
    'DiffExpr',
    'GradReport',
    'Node',
    'Tape',
    'constant',
    'evaluate_with_gradients',
    'forward',
    'parameter',
    'finite_difference_check',
    'validate_gradients',
]
