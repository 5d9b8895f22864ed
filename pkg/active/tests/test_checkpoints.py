import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from active.checkpoints import (
    CheckpointWriter, iteration_dir, latest_checkpoint, load_checkpoint, read_manifest,
    write_manifest,
)
from active.config import ConfigError
from active.loop import active_train
from .test_loop import small_config


class CheckpointTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.run_dir = Path(self.tmp.name) / 'run'

    def tearDown(self):
        self.tmp.cleanup()

    def test_every_iteration_is_written(self):
        config = small_config(max_outer_iters=2)
        write_manifest(self.run_dir, config)
        active_train(config, on_iteration=CheckpointWriter(self.run_dir))
        for i in range(3):
            folder = iteration_dir(self.run_dir, i)
            for name in ('weights.bin', 'best_weights.bin', 'optimizer.npy', 'theta_snr0.csv', 'state.json'):
                self.assertTrue((folder / name).exists(), f"{folder / name} missing")
        self.assertFalse((iteration_dir(self.run_dir, 0) / 'theta_raw_snr0.csv').exists())
        self.assertTrue((iteration_dir(self.run_dir, 1) / 'theta_raw_snr0.csv').exists())
        self.assertEqual(latest_checkpoint(self.run_dir), iteration_dir(self.run_dir, 2))
        report = json.loads((self.run_dir / 'report.json').read_text())
        self.assertEqual(len(report['iterations']), 3)
        lines = (self.run_dir / 'loss.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'outer_iter,epoch,learning_rate,train_loss')
        self.assertEqual(len(lines), 1 + 2 * config.epochs_per_outer)

    def test_resume_matches_uninterrupted_run(self):
        config = small_config(max_outer_iters=3, patience=10)
        expected_weights, expected = active_train(config, on_iteration=CheckpointWriter(self.run_dir))

        state = load_checkpoint(iteration_dir(self.run_dir, 1), config)
        self.assertEqual(state.iteration, 1)
        weights, report = active_train(config, state=state)

        np.testing.assert_array_equal(weights.to_vector(), expected_weights.to_vector())
        self.assertEqual(report.to_dict(), expected.to_dict())

    def test_manifest_round_trip(self):
        config = small_config()
        manifest = write_manifest(self.run_dir, config)
        self.assertEqual(manifest['seed'], config.seed)
        self.assertTrue(manifest['input_digests']['code'].startswith('sha256:'))
        self.assertEqual(read_manifest(self.run_dir), config)

    def test_manifest_seed_mismatch_rejected(self):
        write_manifest(self.run_dir, small_config())
        path = self.run_dir / 'manifest.json'
        document = json.loads(path.read_text())
        document['seed'] = 99
        path.write_text(json.dumps(document))
        with self.assertRaises(ConfigError) as ctx:
            read_manifest(self.run_dir)
        self.assertIn('seed: Does not match config.seed.', ctx.exception.messages)

    def test_missing_run_dir(self):
        self.assertIsNone(latest_checkpoint(self.run_dir))
        with self.assertRaises(ConfigError):
            read_manifest(self.run_dir)
