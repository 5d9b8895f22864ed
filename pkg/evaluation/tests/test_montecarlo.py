import io

import numpy as np
from django.test import SimpleTestCase

from codes.fixtures import load_fixture
from codes.matrix import enumerate_codewords
from decoding.channel import awgn_noise, snr_to_sigma
from decoding.engine import block_errors, ml_decode
from decoding.tanner import build_tanner
from decoding.weights import WeightSet
from evaluation.montecarlo import (
    ErrorStats, monte_carlo_errors, snr_at, snr_gain, sweep, write_sweep_csv,
)


class MonteCarloTests(SimpleTestCase):

    def setUp(self):
        self.hamming = load_fixture('hamming74')

    def test_budget_bound_at_high_snr(self):
        stats = monte_carlo_errors(None, self.hamming, 10.0, min_block_errors=100, max_blocks=1000,
                                   seed=1, layers=5, workers=1)
        self.assertEqual(stats.blocks, 1000)
        self.assertLess(stats.block_errors, 100)
        self.assertFalse(stats.converged)
        self.assertEqual(stats.bound, 'budget')

    def test_error_bound_at_low_snr(self):
        stats = monte_carlo_errors(None, self.hamming, 0.0, min_block_errors=50, max_blocks=10 ** 6,
                                   seed=1, layers=5, chunk_blocks=500, workers=1)
        self.assertTrue(stats.converged)
        self.assertEqual(stats.bound, 'errors')
        self.assertGreaterEqual(stats.block_errors, 50)
        self.assertGreaterEqual(stats.bit_errors, stats.block_errors)
        self.assertLessEqual(stats.bit_errors, 7 * stats.blocks)

    def test_zero_budget_gives_invalid_stats(self):
        stats = monte_carlo_errors(None, self.hamming, 3.0, min_block_errors=10, max_blocks=0, workers=1)
        self.assertFalse(stats.valid)
        self.assertEqual((stats.blocks, stats.block_errors, stats.bit_errors), (0, 0, 0))
        self.assertEqual((stats.fer, stats.ber), (0.0, 0.0))

    def test_same_seed_same_stats(self):
        args = dict(min_block_errors=30, max_blocks=20000, seed=9, layers=5, chunk_blocks=1000, workers=1)
        self.assertEqual(monte_carlo_errors(None, self.hamming, 2.0, **args),
                         monte_carlo_errors(None, self.hamming, 2.0, **args))

    def test_worker_count_does_not_change_result(self):
        args = dict(min_block_errors=40, max_blocks=20000, seed=4, layers=5, chunk_blocks=700)
        single = monte_carlo_errors(None, self.hamming, 2.0, workers=1, **args)
        pooled = monte_carlo_errors(None, self.hamming, 2.0, workers=3, **args)
        self.assertEqual(single, pooled)

    def test_weights_must_fit_code(self):
        other = WeightSet.ones(build_tanner(load_fixture('repetition3').pcm), 5)
        with self.assertRaises(ValueError):
            monte_carlo_errors(other, self.hamming, 2.0, min_block_errors=1, max_blocks=10, workers=1)

    def test_fer_spread_matches_binomial(self):
        """Independent seeds scatter like binomial draws around the pooled FER (99% interval)."""
        runs = [monte_carlo_errors(None, self.hamming, 2.0, min_block_errors=10 ** 9, max_blocks=2000,
                                   seed=s, layers=5, workers=1) for s in range(40)]
        pooled = sum(r.block_errors for r in runs) / sum(r.blocks for r in runs)
        half_width = 2.576 * np.sqrt(pooled * (1 - pooled) / 2000)
        inside = sum(abs(r.fer - pooled) <= half_width for r in runs)
        self.assertGreaterEqual(inside, 38)

    def test_bp_fer_close_to_ml(self):
        stats = monte_carlo_errors(None, self.hamming, 3.0, min_block_errors=100, max_blocks=10 ** 6,
                                   seed=3, layers=5, chunk_blocks=2000, workers=1)
        sigma = snr_to_sigma(3.0, self.hamming.rate)
        z = awgn_noise(7, sigma, np.random.default_rng(3), size=stats.blocks)
        ml_fer = ml_decode(enumerate_codewords(self.hamming.pcm), 1.0 + z).any(axis=1).mean()
        graph = build_tanner(self.hamming.pcm)
        bp_fer = block_errors(graph, WeightSet.ones(graph, 5), z, sigma, 5).any(axis=1).mean()
        self.assertLessEqual(ml_fer, bp_fer)
        self.assertLess(stats.fer, 1.5 * ml_fer)
        self.assertGreater(stats.fer, ml_fer / 1.5)


class SweepTests(SimpleTestCase):

    def setUp(self):
        self.hamming = load_fixture('hamming74')

    def test_single_point_sweep_matches_point(self):
        args = dict(min_block_errors=20, max_blocks=5000, seed=2, layers=5, chunk_blocks=1000, workers=1)
        self.assertEqual(sweep(None, self.hamming, [2.5], **args),
                         [monte_carlo_errors(None, self.hamming, 2.5, **args)])

    def test_fer_nonincreasing_in_snr(self):
        stats = sweep(None, self.hamming, [float(s) for s in range(9)], min_block_errors=300,
                      max_blocks=100000, seed=5, layers=5, chunk_blocks=20000, workers=1)
        for a, b in zip(stats, stats[1:]):
            spread = np.sqrt(a.fer * (1 - a.fer) / a.blocks + b.fer * (1 - b.fer) / b.blocks)
            self.assertLessEqual(b.fer, a.fer + 2 * spread, f"{a.snr_db} -> {b.snr_db} dB")

    def test_csv_schema(self):
        stats = sweep(None, self.hamming, [1.0, 2.0], min_block_errors=5, max_blocks=3000,
                      seed=0, layers=2, chunk_blocks=1000, workers=1)
        buffer = io.StringIO()
        write_sweep_csv(buffer, stats)
        lines = buffer.getvalue().split('\n')
        self.assertEqual(lines[0], 'snr_db,blocks,block_errors,bit_errors,fer,ber,converged')
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines[-1], '')
        self.assertEqual(lines[1].split(',')[0], '1.0')
        self.assertIn(lines[1].split(',')[-1], ('0', '1'))

    def test_empty_grid_rejected(self):
        with self.assertRaises(ValueError):
            sweep(None, self.hamming, [], min_block_errors=1, max_blocks=1)


def curve(points):
    return [ErrorStats(snr_db=snr, n=1, blocks=blocks, block_errors=errors, bit_errors=errors,
                       converged=True) for snr, errors, blocks in points]


class SnrGainTests(SimpleTestCase):

    def test_grid_point_crossing(self):
        reference = curve([(0.0, 100, 1000), (1.0, 10, 1000), (2.0, 1, 1000)])
        self.assertEqual(snr_at(reference, 0.01), 1.0)

    def test_log_linear_interpolation(self):
        improved = curve([(0.0, 100, 1000), (1.0, 1, 1000)])
        self.assertAlmostEqual(snr_at(improved, 0.01), 0.5, places=12)

    def test_gain_is_positive_for_better_curve(self):
        reference = curve([(0.0, 100, 1000), (1.0, 10, 1000), (2.0, 1, 1000)])
        improved = curve([(0.0, 100, 1000), (1.0, 1, 1000)])
        self.assertAlmostEqual(snr_gain(reference, improved, 0.01, metric='fer'), 0.5, places=12)

    def test_target_never_reached(self):
        reference = curve([(0.0, 100, 1000), (1.0, 50, 1000)])
        self.assertIsNone(snr_at(reference, 1e-3))
        self.assertIsNone(snr_gain(reference, reference, 1e-3))

    def test_inconsistent_counts_rejected(self):
        with self.assertRaises(ValueError):
            ErrorStats(snr_db=0.0, n=7, blocks=10, block_errors=5, bit_errors=3, converged=False)
