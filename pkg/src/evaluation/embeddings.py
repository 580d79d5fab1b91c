"""
Cohort Embeddings - forward-only visual/report embeddings of a whole cohort
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import DEFAULT_POOLING
from src.model.encoders import embed_report, embed_visual
from src.utils.errors import IncompatibleInputsError


@dataclass
class CohortEmbeddings:
    """
    One row per present (patient, anatomy) record, patient-major.
    text is None when only the visual branch was encoded.
    """

    visual: np.ndarray
    text: Optional[np.ndarray]
    patient_ids: np.ndarray
    anatomy_ids: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return int(self.patient_ids.shape[0])

    def rows_for(self, anatomy_id):
        return np.flatnonzero(self.anatomy_ids == anatomy_id)


def check_compatible(params, cohort):
    """
    Raises:
        IncompatibleInputsError: If the parameters and the cohort disagree on M or D
    """
    if params.n_anatomies != cohort.n_anatomies or params.embed_dim != cohort.embed_dim:
        raise IncompatibleInputsError(
            f"Checkpoint has M={params.n_anatomies}, D={params.embed_dim} "
            f"but cohort has M={cohort.n_anatomies}, D={cohort.embed_dim}"
        )


def embed_cohort(params, cohort, pooling=DEFAULT_POOLING, patient_limit=None, include_text=True):
    """
    Encode every present record of the first patient_limit patients.

    Reports are encoded raw (no augmentation).
    """
    check_compatible(params, cohort)
    patients = cohort.patients if patient_limit is None else cohort.patients[:patient_limit]
    visual, text, patient_ids, anatomy_ids, labels = [], [], [], [], []
    for patient in patients:
        for record in patient.anatomies:
            if record is None:
                continue
            visual.append(embed_visual(params, record.anatomy_id, record.visual_tokens))
            if include_text:
                text.append(embed_report(params, record.sentences, pooling))
            patient_ids.append(patient.patient_id)
            anatomy_ids.append(record.anatomy_id)
            labels.append(record.label)

    dim = params.embed_dim
    return CohortEmbeddings(
        visual=np.array(visual).reshape(len(visual), dim),
        text=np.array(text).reshape(len(text), dim) if include_text else None,
        patient_ids=np.array(patient_ids, dtype=np.int64),
        anatomy_ids=np.array(anatomy_ids, dtype=np.int64),
        labels=np.array(labels, dtype=np.int64),
    )
