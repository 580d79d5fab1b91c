"""
Tests for the finite-difference validator and the full-objective gradient suite.
"""

import unittest

import numpy as np

from src.augment.rng import Rng
from src.experiments.gradient_check import random_objective, run_gradcheck
from src.numeric import autodiff as ad
from src.numeric.gradcheck import finite_difference_check, relative_error, validate_gradients
from src.objective.losses import bidirectional_info_nce, global_contrastive_loss


class TestFiniteDifferenceCheck(unittest.TestCase):
    """Test cases for finite_difference_check and validate_gradients."""

    def test_quadratic(self):
        x = ad.parameter("x", ())
        self.assertLessEqual(finite_difference_check(ad.scale(x, x), {"x": 2.0}), 1e-7)

    def test_constant_expression(self):
        x = ad.parameter("x", (3,))
        expr = ad.add(ad.reduce_sum(ad.constant([1.0, 2.0])), ad.scale(ad.constant(0.0), ad.reduce_sum(x)))
        report = validate_gradients(expr, {"x": [0.1, 0.2, 0.3]})
        np.testing.assert_array_equal(report.gradients["x"], np.zeros(3))
        self.assertEqual(report.max_relative_error, 0.0)

    def test_local_loss_gradients(self):
        """Test the bidirectional InfoNCE at a random N=3, D=4 configuration."""
        rng = Rng(31)
        visual = ad.parameter("visual", (3, 4))
        reports = ad.parameter("reports", (3, 4))
        log_tau = ad.parameter("log_tau", ())
        expr = bidirectional_info_nce(visual, reports, ad.exp(log_tau))
        bindings = {"visual": rng.normal_array((3, 4)), "reports": rng.normal_array((3, 4)), "log_tau": -0.5}
        self.assertLessEqual(finite_difference_check(expr, bindings), 1e-5)

    def test_global_loss_gradients(self):
        """Test the global loss over K=4 synthetic pairs in D=8."""
        rng = Rng(32)
        pairs, bindings = [], {}
        for k in range(4):
            v, r = ad.parameter(f"v{k}", (8,)), ad.parameter(f"r{k}", (8,))
            bindings[f"v{k}"] = rng.normal_array((8,))
            bindings[f"r{k}"] = rng.normal_array((8,))
            pairs.append((v, r))
        expr = global_contrastive_loss(pairs, 0.5)
        self.assertLessEqual(finite_difference_check(expr, bindings), 1e-4)

    def test_worst_coordinate_is_reported(self):
        x = ad.parameter("x", (2,))
        report = validate_gradients(ad.reduce_sum(ad.exp(x)), {"x": [0.0, 1.0]})
        self.assertIn(report.worst_parameter, (None, "x"))
        self.assertEqual(set(report.finite_differences), {"x"})

    def test_step_must_be_positive(self):
        x = ad.parameter("x", ())
        with self.assertRaises(ValueError):
            validate_gradients(x, {"x": 1.0}, step=0.0)

    def test_relative_error_floor(self):
        self.assertEqual(relative_error(0.0, 0.0), 0.0)
        self.assertAlmostEqual(relative_error(1.0, 3.0), 0.5)


class TestObjectiveGradientSuite(unittest.TestCase):
    """Test cases for the full-objective gradient check."""

    def test_random_objective_respects_bounds(self):
        for case in range(5):
            expr, bindings, (batch_size, n_anatomies, dim) = random_objective(Rng(1, (7, case)), 6, 3, 8)
            self.assertTrue(2 <= batch_size <= 6)
            self.assertTrue(1 <= n_anatomies <= 3)
            self.assertTrue(2 <= dim <= 8)
            self.assertEqual(expr.shape, ())
            self.assertIn("tokens.0.0", bindings)
            self.assertIn("log_tau", bindings)

    def test_small_suite_passes(self):
        result = run_gradcheck(seed=1, n_configs=2, max_batch=3, max_anatomies=2, max_dim=4)
        self.assertEqual(len(result.cases), 2)
        self.assertTrue(result.passed, result.to_dict()["worst"])
        summary = result.to_dict()
        self.assertTrue(summary["passed"])
        self.assertEqual(len(summary["cases"]), 2)

    def test_default_suite_passes(self):
        """Test ten configurations at the default bounds (B <= 6, M <= 3, D <= 8)."""
        result = run_gradcheck(seed=1)
        self.assertEqual(len(result.cases), 10)
        for case in result.cases:
            self.assertTrue(case.batch_size <= 6 and case.n_anatomies <= 3 and case.embed_dim <= 8)
        self.assertTrue(result.passed, result.to_dict()["worst"])

    def test_zero_size_rejected(self):
        with self.assertRaises(ValueError):
            run_gradcheck(seed=1, n_configs=0)


if __name__ == "__main__":
    unittest.main()
