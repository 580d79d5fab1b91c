"""
Vector Operations - dense float64 helpers shared by the autodiff primitives

All functions take array-likes, work in float64 and refuse degenerate input
rather than returning silent zeros.
"""

import numpy as np

from config import DEGENERATE_NORM_EPS
from src.utils.errors import DegenerateInputError, ShapeError


def as_array(values):
    """Return values as a float64 array, rejecting NaN/Inf."""
    array = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise DegenerateInputError("Non-finite value in input")
    return array


def l2_norm(values, axis=None, keepdims=False):
    """Euclidean norm along axis (whole array when axis is None)."""
    array = np.asarray(values, dtype=np.float64)
    return np.sqrt(np.sum(array * array, axis=axis, keepdims=keepdims))


def l2_normalize(values, axis=-1):
    """
    Scale vectors to unit Euclidean norm.

    For a matrix every slice along axis is normalized independently.

    Args:
        values: Vector or matrix
        axis (int): Axis along which norms are taken

    Returns:
        np.ndarray: Unit-norm vector(s) with the same direction

    Raises:
        DegenerateInputError: If any norm is at or below DEGENERATE_NORM_EPS
    """
    array = as_array(values)
    if array.size == 0:
        raise DegenerateInputError("Cannot normalize an empty vector")
    norms = l2_norm(array, axis=axis, keepdims=True)
    if np.any(norms <= DEGENERATE_NORM_EPS):
        raise DegenerateInputError("Cannot normalize a zero-norm vector")
    return array / norms


def cosine_similarity(u, v):
    """
    Cosine of the angle between two vectors.

    Args:
        u: First vector
        v: Second vector, same length as u

    Returns:
        float: <u, v> / (|u| |v|)

    Raises:
        ShapeError: If lengths differ
        DegenerateInputError: If either vector has zero norm
    """
    a = as_array(u)
    b = as_array(v)
    if a.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"cosine_similarity expects equal-length vectors, got {a.shape} and {b.shape}")
    norm_a = l2_norm(a)
    norm_b = l2_norm(b)
    if norm_a <= DEGENERATE_NORM_EPS or norm_b <= DEGENERATE_NORM_EPS:
        raise DegenerateInputError("cosine_similarity of a zero-norm vector is undefined")
    # Product of the norms is commutative, so the result is exactly symmetric
    return float(np.dot(a, b) / (norm_a * norm_b))


def pairwise_cosine(rows_a, rows_b=None):
    """Matrix of cosines between the rows of rows_a and rows_b (rows_a with itself by default)."""
    a = l2_normalize(rows_a, axis=1)
    b = a if rows_b is None else l2_normalize(rows_b, axis=1)
    return np.clip(a @ b.T, -1.0, 1.0)


def softmax(logits, axis=-1):
    """
    Numerically stable softmax (max-subtraction).

    Raises:
        DegenerateInputError: If logits is empty
    """
    array = as_array(logits)
    if array.size == 0:
        raise DegenerateInputError("softmax of an empty vector")
    shifted = array - np.max(array, axis=axis, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=axis, keepdims=True)


def log_softmax(logits, axis=-1):
    """Fused log-softmax; avoids log(softmax) cancellation for large logit gaps."""
    array = as_array(logits)
    if array.size == 0:
        raise DegenerateInputError("log_softmax of an empty vector")
    shifted = array - np.max(array, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
