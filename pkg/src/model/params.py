"""
Model Parameters - learnable state and checkpoint files

Parameter identifiers:
    query.<j>   per-anatomy attention query, shape (D,), j is 0-based
    w_visual    visual projection, shape (D, D)
    w_text      text projection, shape (D, D)
    log_tau     log-temperature, shape ()

Checkpoint file (JSON, version 1):
    {"format": "anatomy-lab-checkpoint", "version": 1, "pooling": "...",
     "n_anatomies": M, "embed_dim": D,
     "parameters": {"<id>": {"shape": [...], "values": [row-major floats]}}}
Floats are written with Python's shortest round-trip repr, so a checkpoint
reloads bitwise.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from config import (
    CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
    DEFAULT_POOLING,
    INITIAL_TEMPERATURE,
    POOLING_MODES,
    PROJECTION_INIT_NOISE,
)
from src.numeric import autodiff as ad
from src.utils.errors import CheckpointFormatError
from src.utils.file_utils import read_json, write_json


def query_name(anatomy_index):
    return f"query.{anatomy_index}"


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Immutable parameter set; the trainer builds a new one after every update."""

    queries: Tuple[np.ndarray, ...]
    w_visual: np.ndarray
    w_text: np.ndarray
    log_tau: float

    @property
    def n_anatomies(self):
        return len(self.queries)

    @property
    def embed_dim(self):
        return int(self.w_visual.shape[0])

    @classmethod
    def initialize(cls, n_anatomies, embed_dim, rng):
        """
        Standard initialization.

        Queries are uniform in [-1/sqrt(D), 1/sqrt(D)]; projections are the
        identity plus uniform noise in [-0.01, 0.01]; tau starts at 0.07.

        Args:
            n_anatomies (int): M
            embed_dim (int): D
            rng (Rng): Generator for the initialization stream

        Returns:
            ModelParams
        """
        bound = 1.0 / math.sqrt(embed_dim)
        queries = tuple(rng.uniform_array((embed_dim,), -bound, bound) for _ in range(n_anatomies))
        eye = np.eye(embed_dim)
        w_visual = eye + rng.uniform_array((embed_dim, embed_dim), -PROJECTION_INIT_NOISE, PROJECTION_INIT_NOISE)
        w_text = eye + rng.uniform_array((embed_dim, embed_dim), -PROJECTION_INIT_NOISE, PROJECTION_INIT_NOISE)
        return cls(queries, w_visual, w_text, math.log(INITIAL_TEMPERATURE))

    @classmethod
    def identity(cls, queries, log_tau=0.0):
        """Parameters with identity projections (handy for hand-checked examples)."""
        queries = tuple(np.asarray(q, dtype=np.float64) for q in queries)
        dim = queries[0].shape[0]
        return cls(queries, np.eye(dim), np.eye(dim), float(log_tau))

    def bindings(self):
        """Parameter identifier -> array, as expected by the autodiff engine."""
        values = {query_name(j): q for j, q in enumerate(self.queries)}
        values["w_visual"] = self.w_visual
        values["w_text"] = self.w_text
        values["log_tau"] = np.array(self.log_tau, dtype=np.float64)
        return values

    @classmethod
    def from_bindings(cls, bindings, n_anatomies):
        queries = tuple(np.array(bindings[query_name(j)], dtype=np.float64) for j in range(n_anatomies))
        return cls(
            queries,
            np.array(bindings["w_visual"], dtype=np.float64),
            np.array(bindings["w_text"], dtype=np.float64),
            float(bindings["log_tau"]),
        )

    @cached_property
    def leaves(self):
        """Parameter leaves shared by every expression built from this parameter set."""
        return {name: ad.parameter(name, np.shape(value)) for name, value in self.bindings().items()}

    def leaf(self, name):
        return self.leaves[name]

    def norms(self):
        """Euclidean norm of every parameter (used in abort reports)."""
        return {name: float(np.linalg.norm(np.ravel(value))) for name, value in self.bindings().items()}

    def equals(self, other):
        """Bitwise equality of every parameter."""
        mine = self.bindings()
        theirs = other.bindings()
        return mine.keys() == theirs.keys() and all(np.array_equal(mine[k], theirs[k]) for k in mine)


def write_checkpoint(params, path, pooling=DEFAULT_POOLING):
    """Write a checkpoint file (see module docstring for the format)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "pooling": pooling,
        "n_anatomies": params.n_anatomies,
        "embed_dim": params.embed_dim,
        "parameters": {
            name: {"shape": list(np.shape(value)), "values": np.ravel(value).tolist()}
            for name, value in params.bindings().items()
        },
    }
    write_json(path, payload)


def read_checkpoint(path):
    """
    Read a checkpoint file.

    Returns:
        tuple: (ModelParams, pooling mode)

    Raises:
        CheckpointFormatError: On any structural problem or version mismatch
    """
    try:
        payload = read_json(path)
    except ValueError as e:
        raise CheckpointFormatError(f"{path}: not valid JSON ({e})")

    if not isinstance(payload, dict):
        raise CheckpointFormatError(f"{path}: expected a JSON object, got {type(payload).__name__}")
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointFormatError(f"{path}: not a checkpoint file")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointFormatError(
            f"{path}: checkpoint version {payload.get('version')} is not supported (expected {CHECKPOINT_VERSION})"
        )
    pooling = payload.get("pooling", DEFAULT_POOLING)
    if pooling not in POOLING_MODES:
        raise CheckpointFormatError(f"{path}: unknown pooling mode '{pooling}'")

    try:
        n_anatomies = int(payload["n_anatomies"])
        bindings = {}
        for name, entry in payload["parameters"].items():
            values = np.array(entry["values"], dtype=np.float64)
            bindings[name] = values.reshape(tuple(entry["shape"]))
        params = ModelParams.from_bindings(bindings, n_anatomies)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointFormatError(f"{path}: malformed parameters ({e})")

    if params.embed_dim != int(payload.get("embed_dim", params.embed_dim)):
        raise CheckpointFormatError(f"{path}: embed_dim does not match parameter shapes")
    return params, pooling
