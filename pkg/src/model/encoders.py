"""
Toy Encoders - differentiable stand-ins for the image and report encoders

Visual side: one learnable query per anatomy attends over that anatomy's
projected visual tokens (single-head scaled dot-product attention).
Text side: sentence features are pooled (mean or position-weighted) and
projected. Both outputs are unit vectors.

All functions return autodiff nodes; wrap them in ad.forward() for values.
"""

import math

import numpy as np

from config import DEFAULT_POOLING, POOLING_MODES, POSITIONAL_GAMMA
from src.numeric import autodiff as ad
from src.utils.errors import DegenerateInputError, ShapeError
from src.model.params import query_name


def temperature(params):
    """tau = exp(log_tau); positive for every parameter value."""
    return ad.exp(params.leaf("log_tau"))


def _check_anatomy(params, anatomy_index):
    if not 0 <= anatomy_index < params.n_anatomies:
        raise IndexError(f"Anatomy index {anatomy_index} out of range for {params.n_anatomies} anatomies")


def attention(params, anatomy_index, tokens):
    """
    Attention weights and pooled visual token for one (patient, anatomy).

    Args:
        params (ModelParams): Model parameters
        anatomy_index (int): 0-based anatomy id
        tokens: (T, D) visual tokens as an array or node

    Returns:
        tuple: (weights node of shape (T,), unit-norm output node of shape (D,))
    """
    _check_anatomy(params, anatomy_index)
    tokens = ad.as_node(tokens)
    if len(tokens.shape) != 2 or tokens.shape[1] != params.embed_dim or tokens.shape[0] < 1:
        raise ShapeError(f"Visual tokens must be (T, {params.embed_dim}) with T >= 1, got {tokens.shape}")

    projected = ad.matmul(tokens, ad.transpose(params.leaf("w_visual")))
    scores = ad.scale(ad.matmul(projected, params.leaf(query_name(anatomy_index))), 1.0 / math.sqrt(params.embed_dim))
    weights = ad.softmax(scores)
    return weights, ad.l2_normalize(ad.matmul(weights, projected))


def aggregate_visual(params, anatomy_index, tokens):
    """Anatomy visual token: query cross-attention over the anatomy's visual tokens."""
    return attention(params, anatomy_index, tokens)[1]


def pooling_weights(n_sentences, pooling=DEFAULT_POOLING):
    """
    Normalized sentence weights.

    mean: 1/L each. positional: gamma^(s-1) / sum, s the 1-based position.
    """
    if n_sentences < 1:
        raise DegenerateInputError("A report needs at least one sentence")
    if pooling == "mean":
        return np.full(n_sentences, 1.0 / n_sentences)
    if pooling == "positional":
        raw = POSITIONAL_GAMMA ** np.arange(n_sentences, dtype=np.float64)
        return raw / np.sum(raw)
    raise ValueError(f"Unknown pooling mode '{pooling}', expected one of {POOLING_MODES}")


def encode_report(params, features, pooling=DEFAULT_POOLING):
    """
    Anatomy report token.

    Args:
        params (ModelParams): Model parameters
        features: (L, D) sentence features, as an array or node, in report order
        pooling (str): 'mean' or 'positional'

    Returns:
        Node: unit-norm report token of shape (D,)
    """
    features = ad.as_node(features)
    if len(features.shape) != 2 or features.shape[0] < 1:
        raise DegenerateInputError(f"Report features must be a non-empty (L, D) matrix, got {features.shape}")
    if features.shape[1] != params.embed_dim:
        raise ShapeError(f"Sentence features must have width {params.embed_dim}, got {features.shape[1]}")

    weights = ad.constant(pooling_weights(features.shape[0], pooling))
    pooled = ad.matmul(weights, features)
    return ad.l2_normalize(ad.matmul(params.leaf("w_text"), pooled))


def embed_visual(params, anatomy_index, tokens):
    """Forward-only visual embedding as an array."""
    return ad.forward(aggregate_visual(params, anatomy_index, tokens), params.bindings())


def embed_report(params, features, pooling=DEFAULT_POOLING):
    """Forward-only report embedding as an array."""
    return ad.forward(encode_report(params, features, pooling), params.bindings())
