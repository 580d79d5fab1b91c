"""
PCA Projection - top principal directions by power iteration with deflation
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from config import POWER_ITERATION_MAX_ITER, POWER_ITERATION_TOL
from src.augment.rng import Rng
from src.numeric.vector_ops import as_array
from src.utils.errors import DegenerateInputError, LabError

logger = logging.getLogger(__name__)

_ZERO = 1e-14
_SIGN_TOLERANCE = 1e-8
_START_SEED = 0


@dataclass
class Projection2D:
    coordinates: np.ndarray  # (n, 2)
    components: np.ndarray  # (2, D), unit rows
    explained: np.ndarray  # explained-variance fractions
    modalities: List[str] = field(default_factory=list)
    anatomies: List[int] = field(default_factory=list)

    def to_frame(self):
        n = self.coordinates.shape[0]
        return pd.DataFrame({
            "x": self.coordinates[:, 0],
            "y": self.coordinates[:, 1],
            "modality": self.modalities or [""] * n,
            "anatomy": self.anatomies or [-1] * n,
        })


def _orthogonalize(vector, basis):
    for row in basis:
        vector = vector - np.dot(vector, row) * row
    return vector


def _fix_sign(vector):
    magnitudes = np.abs(vector)
    nonzero = np.flatnonzero(magnitudes > _SIGN_TOLERANCE * magnitudes.max())
    if nonzero.size and vector[nonzero[0]] < 0:
        return -vector
    return vector


def _fallback_direction(dim, found):
    # Remaining spectrum is zero: take the standard basis vector least covered so far
    best, best_norm = None, -1.0
    for k in range(dim):
        candidate = _orthogonalize(np.eye(dim)[k], found)
        norm = np.linalg.norm(candidate)
        if norm > best_norm + _ZERO:
            best, best_norm = candidate, norm
    return best / best_norm


def power_iteration(matrix, found, tol=POWER_ITERATION_TOL, max_iter=POWER_ITERATION_MAX_ITER):
    """
    Dominant eigenpair of a symmetric PSD matrix, restricted to the
    orthogonal complement of the unit rows in found.

    Returns:
        tuple: (unit eigenvector, eigenvalue >= 0)
    """
    dim = matrix.shape[0]
    # Dense seeded start: almost surely not orthogonal to the dominant eigenvector
    start = Rng(_START_SEED, stream=(dim, len(found))).normal_array((dim,))
    vector = _orthogonalize(start, found)
    norm = np.linalg.norm(vector)
    if norm <= _ZERO:
        return _fallback_direction(dim, found), 0.0
    vector = vector / norm

    for iteration in range(max_iter):
        image = _orthogonalize(matrix @ vector, found)
        norm = np.linalg.norm(image)
        if norm <= _ZERO:
            return _fallback_direction(dim, found), 0.0
        updated = image / norm
        change = np.linalg.norm(updated - vector)
        vector = updated
        if change < tol:
            break
    else:
        logger.warning(f"⚠️ Power iteration stopped after {max_iter} iterations without converging")

    eigenvalue = float(vector @ matrix @ vector)
    return vector, max(eigenvalue, 0.0)


def pca_project(embeddings, modalities=None, anatomies=None, n_components=2):
    """
    Project embeddings onto their top principal directions.

    The data is centered, the covariance (divided by n) is decomposed one
    component at a time by power iteration, each found direction is deflated
    away, and every iterate is re-orthogonalized against earlier components.
    Each component's first loading above 1e-8 of its largest loading is made
    positive.

    Args:
        embeddings: (n, D) array with n >= 3 and D >= 2
        modalities (list): Optional modality tag per row
        anatomies (list): Optional anatomy id per row

    Returns:
        Projection2D

    Raises:
        DegenerateInputError: If all points coincide
    """
    data = as_array(embeddings)
    if data.ndim != 2 or data.shape[0] < 3:
        raise LabError("PCA projection needs at least three embeddings")
    if data.shape[1] < 2:
        raise LabError("PCA projection needs embedding dimension >= 2")

    centered = data - np.mean(data, axis=0)
    covariance = centered.T @ centered / data.shape[0]
    total = float(np.trace(covariance))
    if total <= _ZERO:
        raise DegenerateInputError("All embeddings coincide; there is no variance to project")

    components, eigenvalues = [], []
    deflated = covariance.copy()
    for _ in range(n_components):
        vector, eigenvalue = power_iteration(deflated, components)
        vector = _fix_sign(vector)
        components.append(vector)
        eigenvalues.append(eigenvalue)
        deflated = deflated - eigenvalue * np.outer(vector, vector)

    components = np.array(components)
    return Projection2D(
        coordinates=centered @ components.T,
        components=components,
        explained=np.clip(np.array(eigenvalues) / total, 0.0, 1.0),
        modalities=list(modalities) if modalities is not None else [],
        anatomies=[int(a) for a in (anatomies if anatomies is not None else [])],
    )
