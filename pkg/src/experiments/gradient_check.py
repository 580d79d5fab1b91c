"""
Gradient Check Suite

Builds the full training objective (encoders, local and global losses) at
random small configurations, with the anatomy visual tokens and sentence
features promoted to parameters, and compares reverse-mode gradients with
central finite differences on every coordinate.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

from config import (
    GLOBAL_LOSS_WEIGHT,
    GRADCHECK_CONFIGS,
    GRADCHECK_MAX_ANATOMIES,
    GRADCHECK_MAX_BATCH,
    GRADCHECK_MAX_DIM,
    GRADCHECK_SENTENCES,
    GRADCHECK_TOKENS,
    GRADCHECK_TOLERANCE,
)
from src.augment.rng import Rng
from src.model.encoders import aggregate_visual, encode_report, temperature
from src.model.params import ModelParams
from src.numeric import autodiff as ad
from src.numeric.gradcheck import validate_gradients
from src.objective.batch import AnatomyBatch
from src.objective.losses import build_objective
from src.objective.recombination import build_recombination_plan

logger = logging.getLogger(__name__)

GRADCHECK_STREAM = 7
MISSING_PROBABILITY = 0.2


@dataclass
class GradcheckCase:
    case: int
    batch_size: int
    n_anatomies: int
    embed_dim: int
    n_coordinates: int
    max_relative_error: float
    worst_parameter: Optional[str]
    worst_index: Optional[Tuple[int, ...]]

    def passed(self, tolerance=GRADCHECK_TOLERANCE):
        return self.max_relative_error <= tolerance


@dataclass
class GradcheckResult:
    cases: List[GradcheckCase]
    tolerance: float = GRADCHECK_TOLERANCE

    @property
    def passed(self):
        return all(case.passed(self.tolerance) for case in self.cases)

    def worst(self):
        return max(self.cases, key=lambda case: case.max_relative_error)

    def to_dict(self):
        worst = self.worst()
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst": {
                "case": worst.case,
                "parameter": worst.worst_parameter,
                "index": list(worst.worst_index) if worst.worst_index is not None else None,
                "max_relative_error": worst.max_relative_error,
            },
            "cases": [
                {**asdict(case), "worst_index": list(case.worst_index) if case.worst_index is not None else None}
                for case in self.cases
            ],
        }


def random_objective(rng, max_batch, max_anatomies, max_dim):
    """
    Random total objective with every model parameter and input token as a leaf.

    Returns:
        tuple: (scalar expression, bindings, (B, M, D))
    """
    batch_size = rng.randint(min(2, max_batch), max_batch)
    n_anatomies = rng.randint(1, max_anatomies)
    dim = rng.randint(min(2, max_dim), max_dim)

    initial = ModelParams.initialize(n_anatomies, dim, rng)
    params = ModelParams(initial.queries, initial.w_visual, initial.w_text, rng.uniform(math.log(0.2), 0.0))
    bindings = params.bindings()

    visual, reports = [], []
    for i in range(batch_size):
        visual_row, report_row = [], []
        for j in range(n_anatomies):
            if (i, j) != (0, 0) and rng.bernoulli(MISSING_PROBABILITY):
                visual_row.append(None)
                report_row.append(None)
                continue
            tokens_name, sentences_name = f"tokens.{i}.{j}", f"sentences.{i}.{j}"
            bindings[tokens_name] = rng.normal_array((GRADCHECK_TOKENS, dim))
            bindings[sentences_name] = rng.normal_array((GRADCHECK_SENTENCES, dim))
            tokens = ad.parameter(tokens_name, (GRADCHECK_TOKENS, dim))
            sentences = ad.parameter(sentences_name, (GRADCHECK_SENTENCES, dim))
            visual_row.append(aggregate_visual(params, j, tokens))
            report_row.append(encode_report(params, sentences, "positional"))
        visual.append(visual_row)
        reports.append(report_row)

    batch = AnatomyBatch(visual, reports)
    plan = build_recombination_plan(batch, rng)
    graph = build_objective(batch, plan, temperature(params), GLOBAL_LOSS_WEIGHT)
    return graph.total, bindings, (batch_size, n_anatomies, dim)


def run_gradcheck(seed, n_configs=GRADCHECK_CONFIGS, max_batch=GRADCHECK_MAX_BATCH,
                  max_anatomies=GRADCHECK_MAX_ANATOMIES, max_dim=GRADCHECK_MAX_DIM,
                  tolerance=GRADCHECK_TOLERANCE):
    """
    Finite-difference check of the total objective at n_configs random configurations.

    Returns:
        GradcheckResult
    """
    if min(n_configs, max_batch, max_anatomies, max_dim) < 1:
        raise ValueError("Gradient check sizes must all be >= 1")

    cases = []
    for case in range(n_configs):
        rng = Rng(seed, stream=(GRADCHECK_STREAM, case))
        expr, bindings, (batch_size, n_anatomies, dim) = random_objective(rng, max_batch, max_anatomies, max_dim)
        report = validate_gradients(expr, bindings)
        cases.append(GradcheckCase(
            case=case,
            batch_size=batch_size,
            n_anatomies=n_anatomies,
            embed_dim=dim,
            n_coordinates=sum(int(g.size) for g in report.gradients.values()),
            max_relative_error=float(report.max_relative_error),
            worst_parameter=report.worst_parameter,
            worst_index=report.worst_index,
        ))
        status = "✅" if cases[-1].passed(tolerance) else "❌"
        logger.info(f"{status} case {case}: B={batch_size} M={n_anatomies} D={dim} max rel. error {report.max_relative_error:.2e}")
    return GradcheckResult(cases, tolerance)
