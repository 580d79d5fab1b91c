"""
Adam Optimizer - pure update function plus global-norm gradient clipping
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np


@dataclass
class AdamState:
    """First/second moment estimates per parameter and the number of steps taken."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros(cls, params):
        return cls(
            m={name: np.zeros_like(value, dtype=np.float64) for name, value in params.items()},
            v={name: np.zeros_like(value, dtype=np.float64) for name, value in params.items()},
            t=0,
        )


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """
    One Adam update with bias correction.

    Parameters without a gradient entry are treated as having a zero gradient.

    Args:
        params (dict): name -> array
        grads (dict): name -> array of the same shape
        state (AdamState): Moments from the previous step (not modified)

    Returns:
        tuple: (new params dict, new AdamState)
    """
    t = state.t + 1
    new_params, new_m, new_v = {}, {}, {}
    for name, value in params.items():
        value = np.asarray(value, dtype=np.float64)
        grad = np.asarray(grads.get(name, np.zeros_like(value)), dtype=np.float64)
        if grad.shape != value.shape:
            raise ValueError(f"Gradient for '{name}' has shape {grad.shape}, expected {value.shape}")
        m = beta1 * state.m.get(name, np.zeros_like(value)) + (1.0 - beta1) * grad
        v = beta2 * state.v.get(name, np.zeros_like(value)) + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(new_m, new_v, t)


def global_norm(grads):
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(grads, max_norm):
    """
    Rescale all gradients together so their global norm is at most max_norm.

    Returns:
        tuple: (gradients, norm before clipping, whether clipping happened)
    """
    norm = global_norm(grads)
    if max_norm is None or norm <= max_norm:
        return grads, norm, False
    factor = max_norm / norm
    return {name: g * factor for name, g in grads.items()}, norm, True
