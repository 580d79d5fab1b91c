"""
Trainer - deterministic mini-batch optimization of the total objective

RANDOM STREAMS (derived from cfg.seed):
    (0,)                              parameter initialization
    (1, epoch)                        patient shuffle of one epoch
    (2, epoch, patient, anatomy)      report augmentation
    (3, step)                         recombination plan of one step

Per step: encode the batch (augmenting reports), draw the recombination plan
when the global loss is enabled, evaluate the objective and its gradients on
one tape, clip by global norm, apply Adam.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from tqdm import tqdm

from src.augment.rng import Rng
from src.diagnostics.report import collapse_snapshot
from src.evaluation.embeddings import embed_cohort
from src.model.encoders import temperature
from src.model.params import ModelParams
from src.numeric.autodiff import Tape
from src.objective.losses import breakdown_from_tape, build_objective
from src.objective.recombination import build_recombination_plan
from src.training.adam import AdamState, adam_step, clip_by_global_norm
from src.training.batching import encode_batch
from src.utils.errors import ConfigError, DegenerateInputError, NumericalAbortError

logger = logging.getLogger(__name__)

INIT_STREAM = 0
SHUFFLE_STREAM = 1
PLAN_STREAM = 3


@dataclass
class TrainTrace:
    """Per-step loss breakdowns plus per-epoch collapse snapshots (epoch 0 is before training)."""

    steps: List = field(default_factory=list)
    snapshots: List[Dict] = field(default_factory=list)
    clip_events: int = 0

    def __len__(self):
        return len(self.steps)

    def losses(self):
        return [breakdown.total for breakdown in self.steps]

    def to_jsonl(self):
        return "".join(json.dumps(breakdown.to_record()) + "\n" for breakdown in self.steps)


def planned_steps(cfg, n_patients):
    per_epoch = math.ceil(n_patients / cfg.batch_size)
    total = cfg.epochs * per_epoch
    return total if cfg.max_steps is None else min(total, cfg.max_steps)


def _snapshot(params, cohort, cfg, epoch, step):
    if cfg.snapshot_patients == 0:
        return None
    embeddings = embed_cohort(params, cohort, cfg.pooling, patient_limit=cfg.snapshot_patients)
    if len(np.unique(embeddings.anatomy_ids)) < 2:
        return None
    return {"epoch": epoch, "step": step, **collapse_snapshot(embeddings)}


def train_step(params, cohort, patient_indices, cfg, epoch, step):
    """
    Loss breakdown and gradients of one mini-batch.

    Returns:
        tuple: (LossBreakdown, gradients) or (None, None) when the batch has no pair
    """
    batch, global_batch = encode_batch(params, cohort, patient_indices, cfg, epoch)
    if not batch.has_any_pair():
        return None, None

    plan = None
    if cfg.enable_global_loss:
        plan = build_recombination_plan(batch, Rng(cfg.seed, stream=(PLAN_STREAM, step)))
    graph = build_objective(batch, plan, temperature(params), cfg.effective_lambda, global_batch)

    tape = Tape(graph.total)
    try:
        tape.forward(params.bindings())
    except DegenerateInputError as e:
        logger.error(f"❌ Step {step}: {e}")
        raise NumericalAbortError(step, params.norms())
    breakdown = breakdown_from_tape(graph, tape, step)
    if not math.isfinite(breakdown.total):
        raise NumericalAbortError(step, params.norms())
    grads = tape.backward()
    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise NumericalAbortError(step, params.norms())
    return breakdown, grads


def train(cohort, cfg, show_progress=True):
    """
    Train model parameters on a cohort.

    Args:
        cohort (Cohort): Training cohort
        cfg (TrainConfig): Schedule and objective settings
        show_progress (bool): Show a tqdm bar (hidden automatically on non-TTY output)

    Returns:
        tuple: (ModelParams, TrainTrace)

    Raises:
        ConfigError: If batch_size exceeds the number of patients
        NumericalAbortError: If a loss becomes non-finite
    """
    if cfg.batch_size > cohort.n_patients:
        raise ConfigError(f"batch_size ({cfg.batch_size}) exceeds the number of patients ({cohort.n_patients})")

    params = ModelParams.initialize(cohort.n_anatomies, cohort.embed_dim, Rng(cfg.seed, stream=(INIT_STREAM,)))
    trace = TrainTrace()
    if cfg.epochs == 0:
        logger.info("⚠️ epochs=0: returning the initial parameters")
        return params, trace

    state = AdamState.zeros(params.bindings())
    snapshot = _snapshot(params, cohort, cfg, 0, 0)
    if snapshot:
        trace.snapshots.append(snapshot)

    total_steps = planned_steps(cfg, cohort.n_patients)
    logger.info(
        f"🎯 Training {total_steps} steps: global loss {'on' if cfg.enable_global_loss else 'off'}, "
        f"augmentation {'on' if cfg.enable_augment else 'off'}, pooling={cfg.pooling}"
    )

    step = 0
    with tqdm(total=total_steps, desc="Training", disable=None if show_progress else True) as bar:
        for epoch in range(1, cfg.epochs + 1):
            if step >= total_steps:
                break
            order = list(range(cohort.n_patients))
            Rng(cfg.seed, stream=(SHUFFLE_STREAM, epoch)).shuffle(order)

            for start in range(0, cohort.n_patients, cfg.batch_size):
                if step >= total_steps:
                    break
                step += 1
                breakdown, grads = train_step(params, cohort, order[start:start + cfg.batch_size], cfg, epoch, step)
                bar.update(1)
                if breakdown is None:
                    logger.warning(f"⚠️ Step {step}: batch has no complete anatomy pair, skipped")
                    continue

                grads, norm, clipped = clip_by_global_norm(grads, cfg.clip_norm)
                if clipped:
                    trace.clip_events += 1
                    logger.info(f"Step {step}: gradient norm {norm:.3f} clipped to {cfg.clip_norm}")

                values, state = adam_step(
                    params.bindings(), grads, state, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps
                )
                params = ModelParams.from_bindings(values, cohort.n_anatomies)
                trace.steps.append(breakdown)
                bar.set_postfix(loss=f"{breakdown.total:.4f}")

            snapshot = _snapshot(params, cohort, cfg, epoch, step)
            if snapshot:
                trace.snapshots.append(snapshot)

    if trace.steps:
        logger.info(f"✅ Training done: loss {trace.steps[0].total:.4f} -> {trace.steps[-1].total:.4f}")
    return params, trace
