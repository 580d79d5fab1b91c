"""
Desk-scale acceptance runs on the default cohort.

These train for hundreds of steps and take minutes, so they only run when
ANATOMY_LAB_ACCEPTANCE=1 is set. Thresholds are frozen from the seed-1 runs
at 300 steps with a small margin.
"""

import itertools
import math
import os
import unittest

import numpy as np

from src.augment.rng import Rng
from src.cohort.generator import generate_cohort
from src.cohort.models import CohortConfig
from src.diagnostics.report import diagnose
from src.evaluation.report import evaluate
from src.evaluation.zero_shot import encode_prompts, zero_shot_scores
from src.experiments.ablation import run_ablation
from src.model.params import ModelParams
from src.numeric.vector_ops import cosine_similarity
from src.training.train_config import TrainConfig
from src.training.trainer import train

ENABLED = os.environ.get("ANATOMY_LAB_ACCEPTANCE") == "1"
STEPS = 300


def initial_params(cohort, seed=1):
    return ModelParams.initialize(cohort.n_anatomies, cohort.embed_dim, Rng(seed, stream=(0,)))


def text_collapse(params, cohort):
    """(inter-anatomy mean cosine, fraction of inter-anatomy pairs above 0.9) of the text embeddings."""
    report = diagnose(params, cohort)
    return report.indices["text"].inter, report.histograms["text_inter"].fraction_above


@unittest.skipUnless(ENABLED, "set ANATOMY_LAB_ACCEPTANCE=1 to run desk-scale acceptance runs")
class TestDeskScale(unittest.TestCase):
    """Directional checks on the default cohort (seed 1)."""

    @classmethod
    def setUpClass(cls):
        cls.cohort = generate_cohort(CohortConfig(seed=1))
        cls.cfg = TrainConfig(seed=1, max_steps=STEPS)
        cls.params, cls.trace = train(cls.cohort, cls.cfg, show_progress=False)

    def test_raw_sentences_of_different_anatomies_are_close(self):
        cross = []
        for a, b in itertools.combinations(range(self.cohort.n_anatomies), 2):
            for record_a, record_b in zip(self.cohort.records(a)[:32], self.cohort.records(b)[:32]):
                cross.extend(cosine_similarity(u, v) for u in record_a.sentences for v in record_b.sentences)
        self.assertGreaterEqual(float(np.mean(cross)), math.cos(math.radians(10.0)) - 0.02)

    def test_loss_decreases(self):
        self.assertEqual(len(self.trace), STEPS)
        self.assertLess(self.trace.steps[-1].total, self.trace.steps[0].total)

    def test_untrained_model_is_near_chance(self):
        report, _ = evaluate(initial_params(self.cohort), self.cohort)
        auc = report.classes_first()["auc"]["mean"]
        self.assertTrue(0.35 <= auc <= 0.65, auc)

    def test_untrained_text_embeddings_look_collapsed(self):
        inter, fraction = text_collapse(initial_params(self.cohort), self.cohort)
        self.assertGreaterEqual(fraction, 0.8)
        self.assertGreaterEqual(inter, 0.9)

    def test_trained_scores_separate_the_classes(self):
        prompts = encode_prompts(self.params, self.cohort, self.cfg.pooling)
        scores = zero_shot_scores(self.params, self.cohort, prompts, 0)
        abnormal = [s.score for s in scores if s.label == 1]
        normal = [s.score for s in scores if s.label == 0]
        self.assertGreater(np.mean(abnormal), np.mean(normal))

    def test_global_loss_spreads_the_anatomies(self):
        """Seed 1: the inter-anatomy cosine drops by 0.460 at lambda=0.1 and 0.276 at lambda=0; no pair stays above 0.9."""
        initial_inter, _ = text_collapse(initial_params(self.cohort), self.cohort)
        inter, fraction = text_collapse(self.params, self.cohort)
        local_params, _ = train(self.cohort, self.cfg.model_copy(update={"lam": 0.0}), show_progress=False)
        local_inter, _ = text_collapse(local_params, self.cohort)

        self.assertGreaterEqual(initial_inter - inter, 0.4)
        self.assertLess(fraction, 0.2)
        self.assertGreaterEqual(local_inter - inter, 0.15)


@unittest.skipUnless(ENABLED, "set ANATOMY_LAB_ACCEPTANCE=1 to run desk-scale acceptance runs")
class TestDeskScaleAblation(unittest.TestCase):
    """
    Ablation table on the default cohort (seed 1).

    Seed-1 AUC (mean, std over templates): LCA 0.900/0.122, LCA+GCA 0.940/0.097,
    LCA+CTA 0.908/0.114, LCA+CTA+GCA 0.916/0.106.
    """

    @classmethod
    def setUpClass(cls):
        cohort = generate_cohort(CohortConfig(seed=1))
        table = list(run_ablation(cohort, TrainConfig(seed=1, max_steps=STEPS)))[-1]
        cls.table = table.set_index("configuration")

    def auc(self, label, column="auc_mean"):
        return self.table.loc[label, column]

    def test_auc_is_not_saturated(self):
        for label in self.table.index:
            self.assertLess(self.auc(label), 0.99, label)
            self.assertGreater(self.auc(label, "auc_std"), 0.0, label)

    def test_each_component_helps(self):
        self.assertLess(self.auc("LCA"), self.auc("LCA+GCA"))
        self.assertLess(self.auc("LCA"), self.auc("LCA+CTA"))
        self.assertLessEqual(self.auc("LCA+CTA"), self.auc("LCA+CTA+GCA"))

    def test_global_loss_reduces_prompt_variance(self):
        ratio = self.auc("LCA+GCA", "auc_std") / self.auc("LCA", "auc_std")
        self.assertLess(ratio, 0.9)


if __name__ == "__main__":
    unittest.main()
