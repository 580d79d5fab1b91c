"""
Tests for cross-anatomy recombination.
"""

import unittest
from collections import Counter
from unittest import mock

import numpy as np

from src.augment.rng import Rng
from src.numeric import autodiff as ad
from src.objective.batch import AnatomyBatch
from src.objective.recombination import RecombinationPlan, build_recombination_plan, synthesize_global_tokens
from src.utils.errors import LabError
from tests.fixtures import basis
from tests.test_losses import random_batch


def identity_rng():
    """Stand-in generator whose shuffles leave every list in place."""
    return mock.Mock(spec=Rng)


class TestBuildRecombinationPlan(unittest.TestCase):
    """Test cases for build_recombination_plan."""

    def test_single_patient(self):
        batch = random_batch(70, 1, 2, 3)
        plan = build_recombination_plan(batch, Rng(70))
        self.assertEqual(plan.n_groups, 1)
        self.assertEqual(plan.assignment, [[0], [0]])

    def test_identity_shuffles_keep_patients_together(self):
        batch = random_batch(71, 3, 2, 3)
        plan = build_recombination_plan(batch, identity_rng())
        self.assertEqual(plan.assignment, [[0, 1, 2], [0, 1, 2]])
        for k in range(3):
            self.assertEqual(plan.members(k), [(0, k), (1, k)])

    def test_every_token_used_exactly_once(self):
        """Brute-force multiset check over random batches with missing anatomies."""
        for seed in range(1000):
            rng = Rng(seed, stream=(9,))
            batch_size = rng.randint(1, 6)
            n_anatomies = rng.randint(1, 4)
            missing = {
                (i, j) for i in range(batch_size) for j in range(n_anatomies) if rng.random() < 0.3
            }
            batch = random_batch(seed, batch_size, n_anatomies, 3, missing=missing)
            if not batch.has_any_pair():
                continue
            plan = build_recombination_plan(batch, rng)
            plan.validate(batch)
            counts = Counter(plan.used_slots())
            expected = {(j, i) for j in range(n_anatomies) for i in batch.available_patients(j)}
            self.assertEqual(set(counts), expected)
            self.assertTrue(all(count == 1 for count in counts.values()))
            self.assertLessEqual(plan.n_groups, batch_size)
            self.assertTrue(all(plan.members(k) for k in range(plan.n_groups)))

    def test_full_availability_keeps_batch_size_groups(self):
        batch = random_batch(72, 5, 3, 3)
        self.assertEqual(build_recombination_plan(batch, Rng(72)).n_groups, 5)

    def test_deterministic(self):
        batch = random_batch(73, 4, 3, 3, missing={(1, 2)})
        self.assertEqual(
            build_recombination_plan(batch, Rng(7)).assignment, build_recombination_plan(batch, Rng(7)).assignment
        )

    def test_frozen_plan(self):
        batch = random_batch(75, 3, 2, 3)
        self.assertEqual(build_recombination_plan(batch, Rng(7)).assignment, [[2, 1, 0], [0, 1, 2]])

    def test_empty_batch(self):
        with self.assertRaises(ValueError):
            build_recombination_plan(AnatomyBatch([], []), Rng(1))

    def test_validate_rejects_repeats(self):
        batch = random_batch(74, 2, 1, 3)
        plan = RecombinationPlan(n_groups=2, assignment=[[0, 0]])
        with self.assertRaises(LabError):
            plan.validate(batch)


class TestSynthesizeGlobalTokens(unittest.TestCase):
    """Test cases for synthetic global tokens."""

    def test_single_anatomy_copies_the_token(self):
        batch = random_batch(80, 3, 1, 4)
        plan = build_recombination_plan(batch, Rng(80))
        for k, (visual, report) in enumerate(synthesize_global_tokens(batch, plan)):
            patient = plan.assignment[0][k]
            np.testing.assert_array_equal(ad.forward(visual), batch.visual[patient][0].value)
            np.testing.assert_array_equal(ad.forward(report), batch.reports[patient][0].value)

    def test_mean_of_members(self):
        e1, e2 = basis(2, 0), basis(2, 1)
        batch = AnatomyBatch.from_vectors([[e1, e2]], [[e2, e1]])
        plan = build_recombination_plan(batch, Rng(81))
        [(visual, report)] = synthesize_global_tokens(batch, plan)
        np.testing.assert_allclose(ad.forward(visual), [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(ad.forward(report), [0.5, 0.5], atol=1e-15)

    def test_equal_tokens_stay_equal(self):
        u = basis(3, 2)
        batch = AnatomyBatch.from_vectors([[u, u, u]] * 4, [[u, u, u]] * 4)
        plan = build_recombination_plan(batch, Rng(82))
        for visual, _ in synthesize_global_tokens(batch, plan):
            np.testing.assert_allclose(ad.forward(visual), u, atol=1e-15)

    def test_missing_members_are_not_averaged_in(self):
        e1, e2 = basis(2, 0), basis(2, 1)
        batch = AnatomyBatch.from_vectors([[e1, None], [e2, e2]], [[e1, None], [e2, e2]])
        plan = build_recombination_plan(batch, identity_rng())
        self.assertEqual(plan.assignment, [[0, 1], [1, None]])
        pairs = synthesize_global_tokens(batch, plan)
        np.testing.assert_allclose(ad.forward(pairs[0][0]), [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(ad.forward(pairs[1][0]), e2, atol=1e-15)


if __name__ == "__main__":
    unittest.main()
