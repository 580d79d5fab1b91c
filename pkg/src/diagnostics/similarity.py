"""
Similarity Diagnostics - pairwise-cosine histograms and collapse indices

Both work on the n(n-1)/2 unordered pairs of an embedding set. Pairs can be
restricted to inter-anatomy (different labels) or intra-anatomy (same label)
pairs when labels are given.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from config import COLLAPSE_SIMILARITY_CUTOFF, DEGENERATE_NORM_EPS, HISTOGRAM_BINS
from src.numeric.vector_ops import as_array, pairwise_cosine
from src.utils.errors import LabError

PAIR_MODES = ("all", "inter", "intra")


@dataclass
class SimilarityHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_pairs: int
    mean: float
    median: float
    fraction_above: float
    cutoff: float = COLLAPSE_SIMILARITY_CUTOFF

    def modal_bin(self):
        """(left, right) edges of the most populated bin (first one on ties)."""
        k = int(np.argmax(self.counts))
        return float(self.edges[k]), float(self.edges[k + 1])

    def summary(self):
        return {
            "n_pairs": self.n_pairs,
            "mean": self.mean,
            "median": self.median,
            "fraction_above": self.fraction_above,
            "cutoff": self.cutoff,
            "modal_bin": list(self.modal_bin()),
        }

    def to_frame(self):
        return pd.DataFrame({
            "bin_left": self.edges[:-1],
            "bin_right": self.edges[1:],
            "count": self.counts,
        })


@dataclass
class CollapseIndex:
    """intra/inter mean cosines; intra (and what depends on it) is None when undefined."""

    intra: Optional[float]
    inter: float
    margin: Optional[float]
    ratio: Optional[float]
    n_intra_pairs: int
    n_inter_pairs: int

    @property
    def intra_defined(self):
        return self.intra is not None

    def to_dict(self):
        return {
            "intra": self.intra,
            "inter": self.inter,
            "margin": self.margin,
            "ratio": self.ratio,
            "n_intra_pairs": self.n_intra_pairs,
            "n_inter_pairs": self.n_inter_pairs,
        }


def _pair_cosines(embeddings):
    matrix = as_array(embeddings)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise LabError("Need at least two embeddings to compare")
    rows, cols = np.triu_indices(matrix.shape[0], k=1)
    return pairwise_cosine(matrix)[rows, cols], rows, cols


def similarity_histogram(embeddings, bins=HISTOGRAM_BINS, labels=None, pairs="all",
                         cutoff=COLLAPSE_SIMILARITY_CUTOFF):
    """
    Histogram of pairwise cosines over [-1, 1].

    A cosine on a bin edge is counted in the upper bin; the last bin is
    right-closed so a cosine of exactly 1.0 is counted.

    Args:
        embeddings: (n, D) array, n >= 2
        bins (int): Number of equal-width bins, >= 1
        labels: Anatomy label per embedding (needed for 'inter'/'intra')
        pairs (str): 'all', 'inter' or 'intra'
        cutoff (float): Threshold for the fraction_above summary

    Returns:
        SimilarityHistogram
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if pairs not in PAIR_MODES:
        raise ValueError(f"Unknown pair mode '{pairs}', expected one of {PAIR_MODES}")

    values, rows, cols = _pair_cosines(embeddings)
    if pairs != "all":
        if labels is None:
            raise ValueError(f"pairs='{pairs}' needs labels")
        labels = np.asarray(labels)
        same = labels[rows] == labels[cols]
        values = values[same] if pairs == "intra" else values[~same]
        if values.size == 0:
            raise LabError(f"No {pairs}-anatomy pairs to histogram")

    edges = np.linspace(-1.0, 1.0, bins + 1)
    index = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, bins - 1)
    counts = np.bincount(index, minlength=bins)
    return SimilarityHistogram(
        edges=edges,
        counts=counts,
        n_pairs=int(values.size),
        mean=float(np.mean(values)),
        median=float(np.median(values)),
        fraction_above=float(np.mean(values > cutoff)),
        cutoff=cutoff,
    )


def collapse_index(embeddings, labels):
    """
    Intra- and inter-anatomy mean cosines.

    margin = intra - inter; ratio = (1 - inter) / (1 - intra), None when
    1 - intra is numerically zero.

    Raises:
        LabError: If fewer than two distinct labels are present
    """
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise LabError("Collapse index needs at least two anatomies")
    values, rows, cols = _pair_cosines(embeddings)
    same = labels[rows] == labels[cols]

    inter = float(np.mean(values[~same]))
    intra = float(np.mean(values[same])) if np.any(same) else None
    margin = None if intra is None else intra - inter
    ratio = None
    if intra is not None and 1.0 - intra > DEGENERATE_NORM_EPS:
        ratio = (1.0 - inter) / (1.0 - intra)
    return CollapseIndex(
        intra=intra,
        inter=inter,
        margin=margin,
        ratio=ratio,
        n_intra_pairs=int(np.sum(same)),
        n_inter_pairs=int(np.sum(~same)),
    )
