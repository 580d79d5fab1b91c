"""
Zero-Shot Scoring

Each anatomy's visual token is compared with the encoded abnormal and normal
prompts of one template: score = cos(V, abnormal prompt) - cos(V, normal prompt).
"""

from dataclasses import dataclass

import numpy as np

from config import DEFAULT_POOLING
from src.cohort.models import POLARITIES
from src.evaluation.embeddings import embed_cohort
from src.model.encoders import embed_report
from src.numeric.vector_ops import cosine_similarity
from src.utils.errors import LabError


@dataclass(frozen=True)
class PromptEmbedding:
    anatomy_id: int
    polarity: str
    template: int
    embedding: np.ndarray


@dataclass(frozen=True)
class EvalScore:
    patient_id: int
    anatomy_id: int
    score: float
    label: int


def encode_prompts(params, cohort, pooling=DEFAULT_POOLING):
    """Encode every prompt template of the cohort's bank with the text encoder."""
    return [
        PromptEmbedding(j, polarity, t, embed_report(params, features, pooling))
        for (j, polarity, t), features in sorted(cohort.templates.items(), key=lambda item: item[0])
    ]


def _prompt_lookup(prompts, template, n_anatomies):
    lookup = {(p.anatomy_id, p.polarity): p.embedding for p in prompts if p.template == template}
    for j in range(n_anatomies):
        for polarity in POLARITIES:
            if (j, polarity) not in lookup:
                raise LabError(f"No {polarity} prompt for anatomy {j} in template {template}")
    return lookup


def zero_shot_scores(params, cohort, prompts, template, visual_cache=None):
    """
    Score every present (patient, anatomy) record against one template.

    Args:
        params (ModelParams): Trained parameters
        cohort (Cohort): Evaluation cohort
        prompts (list): PromptEmbedding entries
        template (int): Template index
        visual_cache (CohortEmbeddings): Precomputed visual embeddings (optional)

    Returns:
        list: EvalScore per record, patient-major
    """
    lookup = _prompt_lookup(prompts, template, cohort.n_anatomies)
    embeddings = visual_cache if visual_cache is not None else embed_cohort(params, cohort, include_text=False)
    scores = []
    for row in range(len(embeddings)):
        anatomy = int(embeddings.anatomy_ids[row])
        visual = embeddings.visual[row]
        score = cosine_similarity(visual, lookup[(anatomy, "abnormal")]) - cosine_similarity(
            visual, lookup[(anatomy, "normal")]
        )
        scores.append(EvalScore(int(embeddings.patient_ids[row]), anatomy, score, int(embeddings.labels[row])))
    return scores
