import numpy as np
from django.test import SimpleTestCase

from codes.fixtures import load_fixture_pcm
from decoding.channel import llr
from decoding.tanner import build_tanner
from decoding.weights import GradientSet, WeightSet
from training.backprop import backward
from training.optim import LearningRateSchedule, OptimizerState, rmsprop_step


class RmspropStepTests(SimpleTestCase):

    def setUp(self):
        self.graph = build_tanner(load_fixture_pcm('repetition3'))
        self.weights = WeightSet.ones(self.graph, 1)

    def test_zero_gradient_leaves_weights(self):
        state = OptimizerState(accumulator=np.full(14, 0.5), learning_rate=0.01, decay=0.9)
        new_weights, new_state = rmsprop_step(self.weights, GradientSet.zeros_like(self.weights), state)
        np.testing.assert_array_equal(new_weights.to_vector(), self.weights.to_vector())
        np.testing.assert_allclose(new_state.accumulator, 0.45)
        self.assertEqual(new_state.steps, 1)

    def test_single_update_by_hand(self):
        state = OptimizerState.for_weights(self.weights, learning_rate=0.01, decay=0.9)
        grads = GradientSet.from_vector(np.ones(14), self.weights.shape)
        new_weights, new_state = rmsprop_step(self.weights, grads, state)
        np.testing.assert_allclose(new_state.accumulator, 0.1)
        np.testing.assert_allclose(new_weights.to_vector() - 1.0, -0.01 / np.sqrt(0.1 + 1e-8))
        self.assertAlmostEqual(float(new_weights.vn_channel[0, 0]) - 1.0, -0.03162, places=5)

    def test_constant_gradient_step_tends_to_lr(self):
        state = OptimizerState.for_weights(self.weights, learning_rate=0.01, decay=0.9)
        grads = GradientSet.from_vector(np.full(14, 2.0), self.weights.shape)
        weights = self.weights
        for _ in range(300):
            previous = weights.to_vector()
            weights, state = rmsprop_step(weights, grads, state)
        np.testing.assert_allclose(previous - weights.to_vector(), 0.01, rtol=1e-6)

    def test_shape_mismatch(self):
        state = OptimizerState.for_weights(self.weights, learning_rate=0.01)
        other = GradientSet.zeros_like(WeightSet.ones(self.graph, 2))
        with self.assertRaises(ValueError):
            rmsprop_step(self.weights, other, state)

    def test_invalid_hyperparameters(self):
        with self.assertRaises(ValueError):
            OptimizerState(accumulator=np.zeros(3), learning_rate=0.01, decay=1.0)
        with self.assertRaises(ValueError):
            OptimizerState(accumulator=-np.ones(3), learning_rate=0.01)


class TrainingSmokeTests(SimpleTestCase):

    def test_fifty_steps_reduce_loss(self):
        graph = build_tanner(load_fixture_pcm('repetition3'))
        rng = np.random.default_rng(17)
        sigma = 0.8
        lam = llr(1.0 + rng.normal(0, sigma, size=(256, 3)), sigma)
        weights = WeightSet.ones(graph, 2)
        state = OptimizerState.for_weights(weights, learning_rate=0.01)
        losses = []
        for _ in range(50):
            loss, grads = backward(graph, weights, lam, np.zeros(3), 2)
            losses.append(loss)
            weights, state = rmsprop_step(weights, grads, state)
        self.assertTrue(np.isfinite(losses).all())
        self.assertLess(losses[-1], losses[0])
        self.assertTrue(weights.is_finite())


class LearningRateScheduleTests(SimpleTestCase):

    def test_constant(self):
        schedule = LearningRateSchedule(initial=0.01)
        self.assertEqual(schedule.rate_at(99, 100), 0.01)

    def test_drop_at_midpoint(self):
        schedule = LearningRateSchedule(initial=0.01, drop_to=0.001)
        self.assertEqual(schedule.rate_at(49, 100), 0.01)
        self.assertEqual(schedule.rate_at(50, 100), 0.001)

    def test_rejects_nonpositive(self):
        with self.assertRaises(ValueError):
            LearningRateSchedule(initial=0.0)
