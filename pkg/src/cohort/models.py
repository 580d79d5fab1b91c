"""
Cohort Models - generator configuration and in-memory cohort records
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import COHORT_DEFAULTS

POLARITIES = ("normal", "abnormal")


class CohortConfig(BaseModel):
    """Synthetic cohort generator settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_anatomies: int = Field(default=COHORT_DEFAULTS["n_anatomies"], ge=1)
    embed_dim: int = Field(default=COHORT_DEFAULTS["embed_dim"], ge=1)
    n_patients: int = Field(default=COHORT_DEFAULTS["n_patients"], ge=1)
    tokens_per_anatomy: int = Field(default=COHORT_DEFAULTS["tokens_per_anatomy"], ge=1)
    sentences_normal: int = Field(default=COHORT_DEFAULTS["sentences_normal"], ge=1)
    sentences_abnormal: int = Field(default=COHORT_DEFAULTS["sentences_abnormal"], ge=1)
    sentences_per_report: int = Field(default=COHORT_DEFAULTS["sentences_per_report"], ge=1)
    abnormal_rate: float = Field(default=COHORT_DEFAULTS["abnormal_rate"], ge=0.0, le=1.0)
    missing_rate: float = Field(default=COHORT_DEFAULTS["missing_rate"], ge=0.0, le=1.0)
    text_separation_deg: float = Field(default=COHORT_DEFAULTS["text_separation_deg"], gt=0.0, le=90.0)
    vis_separation_deg: float = Field(default=COHORT_DEFAULTS["vis_separation_deg"], gt=0.0, le=90.0)
    pathology_offset_scale: float = Field(default=COHORT_DEFAULTS["pathology_offset_scale"], ge=0.0)
    noise_scale: float = Field(default=COHORT_DEFAULTS["noise_scale"], ge=0.0)
    sentence_noise_ratio: float = Field(default=COHORT_DEFAULTS["sentence_noise_ratio"], ge=0.0)
    n_templates: int = Field(default=COHORT_DEFAULTS["n_templates"], ge=1)
    template_noise_scale: float = Field(default=COHORT_DEFAULTS["template_noise_scale"], ge=0.0)
    visual_shift_scale: float = Field(default=COHORT_DEFAULTS["visual_shift_scale"], ge=0.0)
    seed: int = Field(default=COHORT_DEFAULTS["seed"], ge=0)


@dataclass(eq=False)
class AnatomyRecord:
    """One (patient, anatomy) entry."""

    anatomy_id: int
    visual_tokens: np.ndarray  # (T, D)
    sentences: np.ndarray  # (L, D), report order
    label: int


@dataclass(eq=False)
class PatientRecord:
    patient_id: int
    anatomies: List[Optional[AnatomyRecord]]  # None when the anatomy is missing

    def anatomy(self, anatomy_id):
        return self.anatomies[anatomy_id]


@dataclass(eq=False)
class Cohort:
    """
    Synthetic dataset: patients with per-anatomy visual tokens, report sentence
    features and labels, plus the prototype geometry and prompt template bank.

    templates maps (anatomy, polarity, template index) to an (L, D) array of
    sentence features; polarity is 'normal' or 'abnormal'.
    """

    config: CohortConfig
    patients: List[PatientRecord]
    visual_prototypes: np.ndarray
    text_prototypes: np.ndarray
    visual_offsets: np.ndarray
    text_offsets: np.ndarray
    templates: Dict[Tuple[int, str, int], np.ndarray] = field(default_factory=dict)

    @property
    def n_anatomies(self):
        return int(self.visual_prototypes.shape[0])

    @property
    def embed_dim(self):
        return int(self.visual_prototypes.shape[1])

    @property
    def n_patients(self):
        return len(self.patients)

    @property
    def n_templates(self):
        return len({key[2] for key in self.templates})

    def records(self, anatomy_id):
        """Present records of one anatomy, in patient order."""
        return [p.anatomies[anatomy_id] for p in self.patients if p.anatomies[anatomy_id] is not None]

    def labels(self, anatomy_id):
        return np.array([record.label for record in self.records(anatomy_id)], dtype=np.int64)

    def template(self, anatomy_id, polarity, template_index):
        return self.templates[(anatomy_id, polarity, template_index)]

    def equals(self, other):
        """Bitwise equality of every array, label and the generator config."""
        if self.config != other.config or self.n_patients != other.n_patients:
            return False
        geometry = ("visual_prototypes", "text_prototypes", "visual_offsets", "text_offsets")
        if not all(np.array_equal(getattr(self, name), getattr(other, name)) for name in geometry):
            return False
        if self.templates.keys() != other.templates.keys():
            return False
        if not all(np.array_equal(self.templates[key], other.templates[key]) for key in self.templates):
            return False
        for mine, theirs in zip(self.patients, other.patients):
            if mine.patient_id != theirs.patient_id or len(mine.anatomies) != len(theirs.anatomies):
                return False
            for a, b in zip(mine.anatomies, theirs.anatomies):
                if (a is None) != (b is None):
                    return False
                if a is None:
                    continue
                if a.anatomy_id != b.anatomy_id or a.label != b.label:
                    return False
                if not (np.array_equal(a.visual_tokens, b.visual_tokens) and np.array_equal(a.sentences, b.sentences)):
                    return False
        return True
