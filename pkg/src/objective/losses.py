"""
Contrastive Losses - local, global and total training objective

Both the per-anatomy local loss and the cross-anatomy global loss are the
same bidirectional InfoNCE over a square cosine-similarity matrix S / tau:

    L = -(1/N) * sum_i [ log softmax_row(S/tau)[i, i] + log softmax_col(S/tau)[i, i] ]

The total is sum_j L_loc(j) + lambda * L_glo, where anatomies without any
available pair are skipped (their local loss is None, not 0.0).
"""

import json
from dataclasses import dataclass
from typing import List, Optional

from config import GLOBAL_LOSS_WEIGHT
from src.numeric import autodiff as ad
from src.objective.recombination import synthesize_global_tokens
from src.utils.errors import LabError


def _temperature_node(tau):
    if isinstance(tau, ad.Node):
        return tau
    tau = float(tau)
    if not tau > 0:
        raise ValueError(f"Temperature must be positive, got {tau}")
    return ad.constant(tau)


def bidirectional_info_nce(visual_rows, report_rows, tau):
    """
    Bidirectional InfoNCE over matched rows.

    Args:
        visual_rows: (N, D) node, row i matched with report row i
        report_rows: (N, D) node
        tau: positive float or scalar node

    Returns:
        Node: scalar loss
    """
    logits = ad.scale(ad.cosine_matrix(visual_rows, report_rows), ad.reciprocal(_temperature_node(tau)))
    image_to_text = ad.diagonal(ad.log_softmax(logits, axis=1))
    text_to_image = ad.diagonal(ad.log_softmax(logits, axis=0))
    return ad.negate(ad.reduce_mean(ad.add(image_to_text, text_to_image)))


def local_contrastive_loss(batch, anatomy, tau):
    """
    Anatomy-level local loss over the available pairs of one anatomy.

    Returns:
        Node | None: scalar loss node, or None (skip) when no pair is available
    """
    tau = _temperature_node(tau)
    patients = batch.available_patients(anatomy)
    if not patients:
        return None
    visual = ad.stack([batch.visual[i][anatomy] for i in patients])
    reports = ad.stack([batch.reports[i][anatomy] for i in patients])
    return bidirectional_info_nce(visual, reports, tau)


def global_contrastive_loss(global_pairs, tau):
    """Cross-anatomy global loss over synthetic (visual, report) token pairs."""
    tau = _temperature_node(tau)
    if not global_pairs:
        raise ValueError("Global loss needs at least one recombined group")
    visual = ad.stack([pair[0] for pair in global_pairs])
    reports = ad.stack([pair[1] for pair in global_pairs])
    return bidirectional_info_nce(visual, reports, tau)


@dataclass
class ObjectiveGraph:
    """Expression graph of one training objective and its components."""

    total: ad.Node
    local: List[Optional[ad.Node]]
    global_loss: Optional[ad.Node]
    tau: ad.Node
    lam: float


@dataclass
class LossBreakdown:
    """Evaluated loss components of one step."""

    local: List[Optional[float]]
    global_loss: Optional[float]
    total: float
    tau: float
    lam: float
    step: Optional[int] = None

    def local_sum(self):
        return sum(value for value in self.local if value is not None)

    def to_record(self):
        """Training-log record; loss_global is omitted when the global loss is disabled."""
        record = {"step": self.step, "loss_total": self.total}
        if self.global_loss is not None:
            record["loss_global"] = self.global_loss
        record["loss_local"] = list(self.local)
        record["tau"] = self.tau
        record["lambda"] = self.lam
        return record

    def to_json(self):
        return json.dumps(self.to_record())


def build_objective(batch, plan, tau, lam=GLOBAL_LOSS_WEIGHT, global_batch=None):
    """
    Build the total-objective graph.

    Args:
        batch (AnatomyBatch): Tokens used by the local losses
        plan (RecombinationPlan | None): Recombination plan; None disables the global loss
        tau: positive float or scalar node, shared by local and global losses
        lam (float): Global loss weight, >= 0
        global_batch (AnatomyBatch): Tokens used for the synthetic global pairs (defaults to batch)

    Returns:
        ObjectiveGraph
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError(f"Global loss weight must be >= 0, got {lam}")
    tau = _temperature_node(tau)

    local = [local_contrastive_loss(batch, j, tau) for j in range(batch.n_anatomies)]
    terms = [loss for loss in local if loss is not None]

    global_loss = None
    if plan is not None:
        global_loss = global_contrastive_loss(synthesize_global_tokens(global_batch or batch, plan), tau)
        terms.append(ad.scale(global_loss, lam))

    if not terms:
        raise LabError("Batch has no available (visual, report) pair")
    return ObjectiveGraph(total=ad.add(*terms), local=local, global_loss=global_loss, tau=tau, lam=lam)


def breakdown_from_tape(graph, tape, step=None):
    """Read every component of an evaluated objective off its tape."""
    return LossBreakdown(
        local=[None if loss is None else tape.value_of(loss) for loss in graph.local],
        global_loss=None if graph.global_loss is None else tape.value_of(graph.global_loss),
        total=tape.value_of(graph.total),
        tau=tape.value_of(graph.tau),
        lam=graph.lam,
        step=step,
    )


def total_loss(batch, plan, tau, lam=GLOBAL_LOSS_WEIGHT, bindings=None):
    """
    Evaluate the total objective.

    Args:
        batch (AnatomyBatch): Mini-batch tokens
        plan (RecombinationPlan | None): None disables the global loss
        tau: positive float or scalar node
        lam (float): Global loss weight
        bindings (dict): Parameter values, needed when tokens or tau depend on parameters

    Returns:
        LossBreakdown
    """
    graph = build_objective(batch, plan, tau, lam)
    tape = ad.Tape(graph.total)
    tape.forward(bindings)
    return breakdown_from_tape(graph, tape)
