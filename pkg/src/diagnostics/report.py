"""
Collapse Diagnostics Report - histograms, collapse indices and a joint projection
for the image and text embeddings of a cohort
"""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from config import DEFAULT_POOLING, HISTOGRAM_BINS
from src.diagnostics.projection import Projection2D, pca_project
from src.diagnostics.similarity import CollapseIndex, SimilarityHistogram, collapse_index, similarity_histogram
from src.evaluation.embeddings import embed_cohort

logger = logging.getLogger(__name__)

MODALITIES = ("image", "text")


@dataclass
class DiagnosticsReport:
    histograms: Dict[str, SimilarityHistogram]  # "<modality>" and "<modality>_inter"
    indices: Dict[str, CollapseIndex]
    projection: Projection2D

    def summary(self):
        return {
            "histograms": {name: hist.summary() for name, hist in sorted(self.histograms.items())},
            "collapse_index": {name: index.to_dict() for name, index in sorted(self.indices.items())},
            "explained_variance": [float(v) for v in self.projection.explained],
        }


def collapse_snapshot(embeddings, bins=HISTOGRAM_BINS):
    """
    Compact collapse statistics for a training trace.

    Returns:
        dict: per modality {intra, inter, margin, inter_fraction_above}
    """
    snapshot = {}
    for modality, matrix in zip(MODALITIES, (embeddings.visual, embeddings.text)):
        index = collapse_index(matrix, embeddings.anatomy_ids)
        inter = similarity_histogram(matrix, bins, labels=embeddings.anatomy_ids, pairs="inter")
        snapshot[modality] = {
            "intra": index.intra,
            "inter": index.inter,
            "margin": index.margin,
            "inter_fraction_above": inter.fraction_above,
        }
    return snapshot


def diagnose(params, cohort, pooling=DEFAULT_POOLING, bins=HISTOGRAM_BINS, patient_limit=None):
    """
    Full diagnostics of a parameter set on a cohort.

    Text embeddings are the raw (unaugmented) report tokens.
    """
    embeddings = embed_cohort(params, cohort, pooling, patient_limit=patient_limit)
    logger.info(f"🎯 Diagnosing {len(embeddings)} anatomy records")

    histograms, indices = {}, {}
    for modality, matrix in zip(MODALITIES, (embeddings.visual, embeddings.text)):
        histograms[modality] = similarity_histogram(matrix, bins)
        histograms[f"{modality}_inter"] = similarity_histogram(
            matrix, bins, labels=embeddings.anatomy_ids, pairs="inter"
        )
        indices[modality] = collapse_index(matrix, embeddings.anatomy_ids)

    joint = np.vstack([embeddings.visual, embeddings.text])
    n = len(embeddings)
    projection = pca_project(
        joint,
        modalities=["image"] * n + ["text"] * n,
        anatomies=np.concatenate([embeddings.anatomy_ids, embeddings.anatomy_ids]),
    )
    logger.info(f"✅ Text inter-anatomy mean cosine {indices['text'].inter:.4f}")
    return DiagnosticsReport(histograms, indices, projection)
