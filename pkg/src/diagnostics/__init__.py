"""
Diagnostics Module
Embedding-space collapse measurements: cosine histograms, cluster indices and PCA projections.
"""
from src.diagnostics.similarity import (
    PAIR_MODES,
    CollapseIndex,
    SimilarityHistogram,
    collapse_index,
    similarity_histogram,
)
from src.diagnostics.projection import Projection2D, pca_project, power_iteration
from src.diagnostics.report import DiagnosticsReport, collapse_snapshot, diagnose

__all__ = [
    'PAIR_MODES',
    'CollapseIndex',
    'SimilarityHistogram',
    'collapse_index',
    'similarity_histogram',
    'Projection2D',
    'pca_project',
    'power_iteration',
    'DiagnosticsReport',
    'collapse_snapshot',
    'diagnose',
]
