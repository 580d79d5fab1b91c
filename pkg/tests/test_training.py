"""
Tests for the Adam optimizer and the trainer.
"""

import dataclasses
import json
import math
import unittest
from unittest.mock import patch

import numpy as np
from pydantic import ValidationError

from src.augment.rng import Rng
from src.cohort.generator import generate_cohort
from src.model.params import ModelParams
from src.objective.losses import LossBreakdown
from src.objective.recombination import build_recombination_plan
from src.training.adam import AdamState, adam_step, clip_by_global_norm, global_norm
from src.training.batching import encode_batch
from src.training.trainer import planned_steps, train
from src.utils.errors import ConfigError, NumericalAbortError
from tests.fixtures import tiny_cohort_config, tiny_train_config


class TestAdamStep(unittest.TestCase):
    """Test cases for adam_step."""

    def test_zero_gradients_leave_parameters_unchanged(self):
        params = {"w": np.array([[0.3, -1.0], [2.0, 0.5]]), "b": np.array(1.5)}
        state = AdamState.zeros(params)
        new_params, new_state = adam_step(params, {"w": np.zeros((2, 2)), "b": np.zeros(())}, state, lr=0.1)
        np.testing.assert_array_equal(new_params["w"], params["w"])
        np.testing.assert_array_equal(new_params["b"], params["b"])
        self.assertEqual(new_state.t, 1)

    def test_first_step_moves_against_the_gradient_sign(self):
        params = {"x": np.array([1.0, 1.0, 1.0])}
        grads = {"x": np.array([0.5, -3.0, 0.01])}
        new_params, _ = adam_step(params, grads, AdamState.zeros(params), lr=0.01)
        np.testing.assert_allclose(new_params["x"], [0.99, 1.01, 0.99], atol=1e-7)

    def test_two_steps_on_a_parabola(self):
        """Hand-executed Adam on f(x) = x^2 from x = 1 with lr = 0.1."""
        lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
        x, m, v = 1.0, 0.0, 0.0
        expected = []
        for t in (1, 2):
            g = 2.0 * x
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            x = x - lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
            expected.append(x)

        params = {"x": np.array(1.0)}
        state = AdamState.zeros(params)
        trajectory = []
        for _ in range(2):
            params, state = adam_step(params, {"x": 2.0 * params["x"]}, state, lr=lr)
            trajectory.append(float(params["x"]))
        np.testing.assert_allclose(trajectory, expected, rtol=0, atol=1e-12)
        self.assertAlmostEqual(trajectory[0], 0.9, delta=1e-8)

    def test_state_is_not_mutated(self):
        params = {"x": np.array([1.0])}
        state = AdamState.zeros(params)
        adam_step(params, {"x": np.array([1.0])}, state, lr=0.1)
        self.assertEqual(state.t, 0)
        np.testing.assert_array_equal(state.m["x"], [0.0])

    def test_gradient_shape_mismatch(self):
        params = {"x": np.zeros(2)}
        with self.assertRaises(ValueError):
            adam_step(params, {"x": np.zeros(3)}, AdamState.zeros(params), lr=0.1)


class TestClipping(unittest.TestCase):

    def test_clip_to_max_norm(self):
        grads = {"a": np.array([3.0]), "b": np.array([4.0])}
        clipped, norm, was_clipped = clip_by_global_norm(grads, 1.0)
        self.assertEqual(norm, 5.0)
        self.assertTrue(was_clipped)
        self.assertAlmostEqual(global_norm(clipped), 1.0, delta=1e-15)
        np.testing.assert_allclose(clipped["a"], [0.6])

    def test_small_or_unbounded_gradients_pass_through(self):
        grads = {"a": np.array([0.3, 0.4])}
        self.assertIs(clip_by_global_norm(grads, 1.0)[0], grads)
        self.assertFalse(clip_by_global_norm({"a": np.array([30.0])}, None)[2])


class TestTrain(unittest.TestCase):
    """Test cases for train."""

    @classmethod
    def setUpClass(cls):
        cls.cohort = generate_cohort(tiny_cohort_config())

    def test_zero_epochs_returns_initialization(self):
        params, trace = train(self.cohort, tiny_train_config(epochs=0), show_progress=False)
        initial = ModelParams.initialize(2, 8, Rng(5, stream=(0,)))
        self.assertTrue(params.equals(initial))
        self.assertEqual(len(trace), 0)
        self.assertEqual(trace.to_jsonl(), "")

    def test_zero_learning_rate_keeps_parameters(self):
        cfg = tiny_train_config(
            epochs=3, batch_size=8, learning_rate=0.0, enable_augment=False, enable_global_loss=False
        )
        params, trace = train(self.cohort, cfg, show_progress=False)
        initial = ModelParams.initialize(2, 8, Rng(5, stream=(0,)))
        self.assertTrue(params.equals(initial))
        losses = trace.losses()
        self.assertEqual(len(losses), 3)
        np.testing.assert_allclose(losses, losses[0], rtol=0, atol=1e-12)

    def test_trace_records(self):
        params, trace = train(self.cohort, tiny_train_config(epochs=2), show_progress=False)
        self.assertEqual(len(trace), planned_steps(tiny_train_config(epochs=2), 8))
        records = [json.loads(line) for line in trace.to_jsonl().splitlines()]
        self.assertEqual([r["step"] for r in records], [1, 2, 3, 4])
        for record in records:
            self.assertIn("loss_global", record)
            self.assertEqual(len(record["loss_local"]), 2)
            self.assertAlmostEqual(
                record["loss_total"], sum(record["loss_local"]) + 0.1 * record["loss_global"], delta=1e-12
            )
        self.assertTrue(all(math.isfinite(value) for value in params.norms().values()))

    def test_without_global_loss(self):
        _, trace = train(self.cohort, tiny_train_config(enable_global_loss=False), show_progress=False)
        for line in trace.to_jsonl().splitlines():
            record = json.loads(line)
            self.assertNotIn("loss_global", record)
            self.assertAlmostEqual(record["loss_total"], sum(record["loss_local"]), delta=1e-12)

    def test_sentence_order_is_irrelevant_under_mean_pooling(self):
        cfg = tiny_train_config(epochs=3, pooling="mean", enable_augment=False)
        rng = Rng(77)
        patients = []
        for patient in self.cohort.patients:
            records = []
            for record in patient.anatomies:
                if record is not None:
                    order = list(range(record.sentences.shape[0]))
                    rng.shuffle(order)
                    record = dataclasses.replace(record, sentences=record.sentences[order])
                records.append(record)
            patients.append(dataclasses.replace(patient, anatomies=records))
        reordered = dataclasses.replace(self.cohort, patients=patients)

        params, trace = train(self.cohort, cfg, show_progress=False)
        other_params, other_trace = train(reordered, cfg, show_progress=False)
        np.testing.assert_allclose(other_trace.losses(), trace.losses(), rtol=0, atol=1e-10)
        for name, value in params.bindings().items():
            np.testing.assert_allclose(other_params.bindings()[name], value, rtol=0, atol=1e-9)

    def test_deterministic(self):
        cfg = tiny_train_config(epochs=2)
        first = train(self.cohort, cfg, show_progress=False)
        second = train(self.cohort, cfg, show_progress=False)
        self.assertTrue(first[0].equals(second[0]))
        self.assertEqual(first[1].to_jsonl(), second[1].to_jsonl())

    def test_frozen_batch_schedule_and_plans(self):
        plans = []

        def recording(batch, rng):
            plan = build_recombination_plan(batch, rng)
            plans.append(plan.assignment)
            return plan

        with patch("src.training.trainer.build_recombination_plan", side_effect=recording), \
                patch("src.training.trainer.encode_batch", wraps=encode_batch) as encode:
            train(self.cohort, tiny_train_config(epochs=2), show_progress=False)
        batches = [list(call.args[2]) for call in encode.call_args_list]
        self.assertEqual(batches, [[5, 2, 4, 1], [6, 3, 0, 7], [1, 4, 2, 7], [5, 6, 0, 3]])
        self.assertEqual(plans[:2], [[[0, 2, 1, 3], [3, 2, 0, 1]], [[1, 0, 3, 2], [0, 3, 1, 2]]])

    def test_max_steps(self):
        _, trace = train(self.cohort, tiny_train_config(epochs=5, max_steps=3), show_progress=False)
        self.assertEqual(len(trace), 3)

    def test_snapshots_per_epoch(self):
        _, trace = train(self.cohort, tiny_train_config(epochs=2), show_progress=False)
        self.assertEqual([s["epoch"] for s in trace.snapshots], [0, 1, 2])
        _, trace = train(self.cohort, tiny_train_config(epochs=2, snapshot_patients=0), show_progress=False)
        self.assertEqual(trace.snapshots, [])

    def test_batch_larger_than_cohort(self):
        with self.assertRaises(ConfigError):
            train(self.cohort, tiny_train_config(batch_size=9), show_progress=False)

    def test_invalid_schedule(self):
        with self.assertRaises(ValidationError):
            tiny_train_config(epochs=-1)
        with self.assertRaises(ValidationError):
            tiny_train_config(learning_rate=-0.1)

    def test_non_finite_loss_aborts(self):
        nan_breakdown = LossBreakdown(local=[math.nan, 0.0], global_loss=None, total=math.nan, tau=0.07, lam=0.1, step=1)
        with patch("src.training.trainer.breakdown_from_tape", return_value=nan_breakdown):
            with self.assertRaises(NumericalAbortError) as ctx:
                train(self.cohort, tiny_train_config(), show_progress=False)
        self.assertEqual(ctx.exception.step, 1)
        self.assertIn("w_visual", ctx.exception.payload()["parameter_norms"])


if __name__ == "__main__":
    unittest.main()
