"""
Cross-Anatomy Recombination

Synthetic global samples are assembled by taking, for every anatomy, a
random permutation of the patients in the batch and grouping the k-th
entries together. Every available (patient, anatomy) token lands in exactly
one group, so no token is repeated or dropped. The group's global visual and
report tokens are the plain means of its members.
"""

from dataclasses import dataclass
from typing import List, Optional

from src.numeric import autodiff as ad
from src.utils.errors import LabError


@dataclass(frozen=True)
class RecombinationPlan:
    """
    assignment[j][k] is the batch position whose anatomy-j token joins group k,
    or None when group k has no anatomy-j member.
    """

    n_groups: int
    assignment: List[List[Optional[int]]]

    def members(self, group):
        """(anatomy, patient) pairs of one group."""
        return [(j, column[group]) for j, column in enumerate(self.assignment) if column[group] is not None]

    def used_slots(self):
        """Every (anatomy, patient) pair the plan uses, with repetitions."""
        return [(j, i) for j, column in enumerate(self.assignment) for i in column if i is not None]

    def validate(self, batch):
        """
        Check the exactly-once and non-empty-group invariants against a batch.

        Raises:
            LabError: On the first violation
        """
        expected = sorted((j, i) for j in range(batch.n_anatomies) for i in batch.available_patients(j))
        if sorted(self.used_slots()) != expected:
            raise LabError("Recombination plan does not use every available token exactly once")
        for k in range(self.n_groups):
            if not self.members(k):
                raise LabError(f"Recombination group {k} is empty")


def build_recombination_plan(batch, rng):
    """
    Draw a recombination plan.

    K starts at the batch size. For each anatomy, the available patients are
    shuffled and placed on a uniformly chosen set of N_j group slots; groups
    that end up with no member are dropped.

    Args:
        batch (AnatomyBatch): Tokens and availability of the mini-batch
        rng (Rng): Generator for this step's plan

    Returns:
        RecombinationPlan

    Raises:
        ValueError: If the batch has no available pair
    """
    if batch.batch_size == 0 or not batch.has_any_pair():
        raise ValueError("Cannot recombine an empty batch")

    n_slots = batch.batch_size
    assignment = []
    for anatomy in range(batch.n_anatomies):
        patients = batch.available_patients(anatomy)
        slots = list(range(n_slots))
        rng.shuffle(slots)
        order = list(patients)
        rng.shuffle(order)
        column = [None] * n_slots
        for slot, patient in zip(slots[:len(order)], order):
            column[slot] = patient
        assignment.append(column)

    occupied = [k for k in range(n_slots) if any(column[k] is not None for column in assignment)]
    assignment = [[column[k] for k in occupied] for column in assignment]
    return RecombinationPlan(n_groups=len(occupied), assignment=assignment)


def synthesize_global_tokens(batch, plan):
    """
    Global (visual, report) token pairs, one per group.

    Each token is the arithmetic mean of the group's member tokens (divided
    by the number of members present). No re-normalization is applied.

    Returns:
        list: [(visual node, report node)] in group order
    """
    pairs = []
    for group in range(plan.n_groups):
        members = plan.members(group)
        if not members:
            raise LabError(f"Recombination group {group} is empty")
        visual = ad.reduce_mean(ad.stack([batch.visual[i][j] for j, i in members]), axis=0)
        report = ad.reduce_mean(ad.stack([batch.reports[i][j] for j, i in members]), axis=0)
        pairs.append((visual, report))
    return pairs
