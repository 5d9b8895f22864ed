import numpy as np
from django.test import SimpleTestCase

from codes.fixtures import load_fixture
from decoding.channel import awgn_noise, llr, snr_to_sigma
from decoding.engine import WBPDecoder, wbp_forward
from decoding.tanner import build_tanner
from decoding.weights import WeightSet
from evaluation.montecarlo import monte_carlo_errors
from sampling.shells import RadialPmf, build_partition
from training.loss import bce_multiloss
from active.config import TrainRunConfig
from active.loop import (
    active_train, build_training_batch, estimate_theta, initial_state, split_evenly,
)


def small_config(**overrides):
    values = dict(
        code=load_fixture('repetition3'),
        snr_list_db=(1.0,),
        shells=20,
        gamma=0.7,
        layers=2,
        batch_size=40,
        batches_per_epoch=2,
        epochs_per_outer=2,
        max_outer_iters=2,
        theta_test_samples=3000,
        validation_samples=400,
        patience=5,
        seed=7,
        code_source={'fixture': 'repetition3', 'd_min': None},
    )
    values.update(overrides)
    return TrainRunConfig(**values)


class FixedOutcomeDecoder:
    """Stand-in decoder that always (or never) fails."""

    def __init__(self, fails):
        self.fails = fails

    def bit_errors(self, z, sigma):
        return np.full(np.shape(z), self.fails, dtype=np.uint8)


class SplitEvenlyTests(SimpleTestCase):

    def test_remainder_goes_to_first_parts(self):
        self.assertEqual(split_evenly(10, 3), [4, 3, 3])
        self.assertEqual(split_evenly(2, 4), [1, 1, 0, 0])
        self.assertEqual(sum(split_evenly(20001, 7)), 20001)


class EstimateThetaTests(SimpleTestCase):

    def setUp(self):
        self.partition = build_partition(3, 0.5, 20, 1e-6)
        self.uniform = RadialPmf(masses=np.full(20, 1 / 20), partition=self.partition)

    def test_decoder_that_never_fails(self):
        profile = estimate_theta(FixedOutcomeDecoder(False), self.partition, self.uniform, 5000, 0.5,
                                 np.random.default_rng(1))
        self.assertEqual(int(profile.trials.sum()), 5000)
        self.assertEqual(int(profile.errors.sum()), 0)
        self.assertTrue(profile.is_zero())

    def test_decoder_that_always_fails(self):
        profile = estimate_theta(FixedOutcomeDecoder(True), self.partition, self.uniform, 5000, 0.5,
                                 np.random.default_rng(1))
        visited = profile.trials > 0
        np.testing.assert_array_equal(profile.theta[visited], 1.0)
        np.testing.assert_array_equal(profile.theta[~visited], 0.0)

    def test_repetition_errors_live_in_outer_shells(self):
        decoder = WBPDecoder.for_code(load_fixture('repetition3'), layers=5)
        profile = estimate_theta(decoder, self.partition, self.uniform, 20000, 0.5,
                                 np.random.default_rng(2))
        b = self.partition.boundaries
        inner = b[1:] <= 1.0
        outer = b[:-1] >= 2.2
        self.assertTrue(inner.any() and outer.any())
        self.assertEqual(int(profile.errors[inner].sum()), 0)
        self.assertGreater(int(profile.errors[outer].sum()), 0)
        self.assertGreater(profile.theta[outer].mean(), profile.theta[inner].mean())

    def test_rejects_foreign_pmf(self):
        other = build_partition(3, 0.6, 20, 1e-6)
        with self.assertRaises(ValueError):
            estimate_theta(FixedOutcomeDecoder(False), other, self.uniform, 10, 0.5,
                           np.random.default_rng(0))


class TrainingBatchTests(SimpleTestCase):

    def test_batch_mixes_snrs_evenly(self):
        state = initial_state(small_config(snr_list_db=(0.0, 2.0, 4.0), max_outer_iters=0))
        batch = build_training_batch(state, 100, np.random.default_rng(3))
        self.assertEqual(len(batch), 100)
        self.assertEqual(batch.llr.shape, (100, 3))
        np.testing.assert_array_equal(np.bincount(batch.snr_index), [34, 33, 33])
        np.testing.assert_array_equal(batch.labels, 0)

    def test_initial_batch_uses_untilted_masses(self):
        state = initial_state(small_config(max_outer_iters=0))
        snr = state.snr_states[0]
        np.testing.assert_allclose(snr.sampling_pmf.masses, snr.base_pmf.masses, rtol=1e-12)


class ActiveTrainTests(SimpleTestCase):

    def test_zero_outer_iterations_returns_unit_weights(self):
        config = small_config(max_outer_iters=0)
        weights, report = active_train(config)
        np.testing.assert_array_equal(weights.to_vector(), 1.0)
        self.assertEqual(report.stop_reason, 'max_outer_iters')
        self.assertEqual(report.best_iteration, 0)
        self.assertEqual(len(report.iterations), 1)

    def test_returned_weights_have_best_recorded_validation_loss(self):
        weights, report = active_train(small_config(max_outer_iters=3))
        losses = [record['validation_loss'] for record in report.iterations]
        self.assertEqual(report.best_validation_loss, min(losses))
        self.assertEqual(losses[report.best_iteration], min(losses))
        self.assertTrue(weights.is_finite())

    def test_tilted_pmf_drops_shells_above_gamma(self):
        config = small_config(snr_list_db=(-2.0,), shells=30, gamma=0.3, max_outer_iters=1,
                              theta_test_samples=20000)
        _, report = active_train(config)
        record = report.iterations[1]['snr'][0]
        raw = np.array(record['theta_raw'])
        pmf = np.array(record['sampling_pmf'])
        self.assertTrue((raw > 0.3).any())
        self.assertFalse(record['fallback'])
        np.testing.assert_array_equal(pmf[raw > 0.3], 0.0)
        self.assertAlmostEqual(pmf.sum(), 1.0, places=12)

    def test_frozen_theta_keeps_chi_masses(self):
        _, report = active_train(small_config(freeze_theta=True))
        for record in report.iterations:
            snr = record['snr'][0]
            self.assertIsNone(snr['theta_raw'])
            np.testing.assert_array_equal(snr['theta_filled'], 1.0)

    def test_target_loss_stops_early(self):
        _, report = active_train(small_config(target_loss=1e6, max_outer_iters=4))
        self.assertEqual(report.stop_reason, 'target_loss')
        self.assertEqual(len(report.iterations), 2)

    def test_same_seed_same_run(self):
        first_weights, first = active_train(small_config())
        second_weights, second = active_train(small_config())
        np.testing.assert_array_equal(first_weights.to_vector(), second_weights.to_vector())
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_different_seed_different_run(self):
        _, first = active_train(small_config(seed=1, max_outer_iters=1))
        _, second = active_train(small_config(seed=2, max_outer_iters=1))
        self.assertNotEqual(first.iterations[1]['train_losses'], second.iterations[1]['train_losses'])

    def test_sigma_matches_code_rate(self):
        state = initial_state(small_config(snr_list_db=(3.0,), max_outer_iters=0))
        self.assertAlmostEqual(state.snr_states[0].sigma, snr_to_sigma(3.0, 1 / 3), places=15)


def held_out_loss(weights, code, snr_db, layers, samples, seed):
    """Multiloss of the all-zero codeword over fresh AWGN, independent of any run."""
    sigma = snr_to_sigma(snr_db, code.rate)
    z = awgn_noise(code.n, sigma, np.random.default_rng(seed), size=samples)
    graph = build_tanner(code.pcm)
    trace = wbp_forward(graph, weights, llr(1.0 + z, sigma), layers, 10.0)
    return bce_multiloss(trace, np.zeros((samples, code.n), dtype=np.uint8))


def held_out_ber(weights, code, snr_db, layers, blocks, seed):
    return monte_carlo_errors(weights, code, snr_db, min_block_errors=10 ** 9, max_blocks=blocks,
                              seed=seed, layers=layers, chunk_blocks=20000, workers=1)


def assert_no_ber_degradation(test, trained, unit):
    p = unit.ber
    sigma = np.sqrt(p * (1 - p) / (unit.blocks * unit.n))
    test.assertLessEqual(trained.ber, unit.ber + 2 * sigma,
                         f"trained BER {trained.ber:.3e} vs unit {unit.ber:.3e}")


class RepetitionNoDegradationTests(SimpleTestCase):

    def test_returned_weights_no_worse_on_held_out_blocks(self):
        code = load_fixture('repetition3')
        config = small_config(snr_list_db=(1.0,), layers=2, batch_size=256, batches_per_epoch=4,
                              epochs_per_outer=20, max_outer_iters=3, validation_samples=4000,
                              theta_test_samples=5000, patience=2, seed=11)
        weights, _ = active_train(config)
        unit = WeightSet.ones(build_tanner(code.pcm), 2)
        trained_stats = held_out_ber(weights, code, 1.0, 2, 100000, seed=2024)
        unit_stats = held_out_ber(unit, code, 1.0, 2, 100000, seed=2024)
        self.assertEqual(trained_stats.blocks, 100000)
        assert_no_ber_degradation(self, trained_stats, unit_stats)


class Bch15ActiveTrainingTests(SimpleTestCase):
    """BCH(15,7) preset at 4 dB with a shortened epoch."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.code = load_fixture('bch15_7')
        cls.config = TrainRunConfig(
            code=cls.code, snr_list_db=(4.0,), shells=100, gamma=0.7, layers=5,
            batch_size=512, batches_per_epoch=4, epochs_per_outer=20, max_outer_iters=5,
            theta_test_samples=20000, validation_samples=4000, patience=2, seed=1234,
            code_source={'fixture': 'bch15_7', 'd_min': None},
        )
        cls.weights, cls.report = active_train(cls.config)
        cls.unit = WeightSet.ones(build_tanner(cls.code.pcm), 5)

    def test_loss_at_returned_checkpoint_no_worse_than_unit(self):
        trained = held_out_loss(self.weights, self.code, 4.0, 5, 20000, seed=77)
        unit = held_out_loss(self.unit, self.code, 4.0, 5, 20000, seed=77)
        self.assertLessEqual(trained, unit)

    def test_held_out_ber_no_worse_than_plain_bp(self):
        trained = held_out_ber(self.weights, self.code, 4.0, 5, 100000, seed=4321)
        unit = held_out_ber(self.unit, self.code, 4.0, 5, 100000, seed=4321)
        assert_no_ber_degradation(self, trained, unit)

    def test_sampling_support_shrinks_after_first_iteration(self):
        supports = [record['snr'][0]['support'] for record in self.report.iterations]
        self.assertEqual(supports[0], self.config.shells)
        self.assertGreater(len(supports), 1)
        self.assertLess(supports[1], supports[0])
        first = self.report.iterations[1]['snr'][0]
        filled = np.array(first['theta_filled'])
        pmf = np.array(first['sampling_pmf'])
        np.testing.assert_array_equal(pmf[filled == 0], 0.0)
        self.assertTrue((filled[pmf > 0] <= self.config.gamma).all())
