"""
Anatomy Batch - anatomy tokens of one mini-batch with availability masks
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.numeric import autodiff as ad
from src.numeric.vector_ops import l2_norm
from src.utils.errors import DegenerateInputError, ShapeError

UNIT_NORM_TOLERANCE = 1e-9


@dataclass
class AnatomyBatch:
    """
    visual[i][j] and reports[i][j] hold the anatomy visual/report tokens of
    patient i, anatomy j as autodiff nodes, or None when the anatomy is absent.
    A pair is available only when both tokens are present.
    """

    visual: List[List[Optional[ad.Node]]]
    reports: List[List[Optional[ad.Node]]]
    patient_ids: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.visual) != len(self.reports):
            raise ShapeError("visual and report token tables must have the same number of patients")
        widths = {len(row) for row in self.visual} | {len(row) for row in self.reports}
        if len(widths) > 1:
            raise ShapeError("Every patient must list the same number of anatomies")
        if not self.patient_ids:
            self.patient_ids = list(range(len(self.visual)))

    @property
    def batch_size(self):
        return len(self.visual)

    @property
    def n_anatomies(self):
        return len(self.visual[0]) if self.visual else 0

    def available(self, patient, anatomy):
        return self.visual[patient][anatomy] is not None and self.reports[patient][anatomy] is not None

    def available_patients(self, anatomy):
        """Batch positions with a complete (visual, report) pair for this anatomy, ascending."""
        return [i for i in range(self.batch_size) if self.available(i, anatomy)]

    def count(self, anatomy):
        """N_j."""
        return len(self.available_patients(anatomy))

    def has_any_pair(self):
        return any(self.available(i, j) for i in range(self.batch_size) for j in range(self.n_anatomies))

    def with_reports(self, reports):
        """Same visual tokens with a different report table."""
        return AnatomyBatch(self.visual, reports, list(self.patient_ids))

    def permuted(self, order):
        """Batch whose position p holds the patient previously at order[p]."""
        return AnatomyBatch(
            [self.visual[i] for i in order],
            [self.reports[i] for i in order],
            [self.patient_ids[i] for i in order],
        )

    @classmethod
    def from_vectors(cls, visual, reports):
        """
        Build a batch from plain vectors (None marks an absent token).

        Raises:
            DegenerateInputError: If a present token is not unit-norm
        """
        def wrap(table):
            wrapped = []
            for row in table:
                nodes = []
                for vector in row:
                    if vector is None:
                        nodes.append(None)
                        continue
                    array = np.asarray(vector, dtype=np.float64)
                    if abs(l2_norm(array) - 1.0) > UNIT_NORM_TOLERANCE:
                        raise DegenerateInputError("Anatomy tokens must be unit-norm")
                    nodes.append(ad.constant(array))
                wrapped.append(nodes)
            return wrapped

        return cls(wrap(visual), wrap(reports))
