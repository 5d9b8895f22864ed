import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from codes.fixtures import fixture_path
from active.config import ConfigError, TrainRunConfig, load_run_config


class RunConfigTests(SimpleTestCase):

    def test_defaults_fill_missing_sections(self):
        config = TrainRunConfig.from_document({'code': {'fixture': 'hamming74'}, 'snr_list_db': [4.0]})
        self.assertEqual(config.code.n, 7)
        self.assertEqual(config.code.d_min, 3)
        self.assertEqual(config.layers, 5)
        self.assertEqual(config.clip, 10.0)
        self.assertEqual(config.shells, 100)
        self.assertEqual(config.gamma, 0.7)
        self.assertEqual(config.batch_size, 512)
        self.assertEqual(config.learning_rate.initial, 0.01)
        self.assertEqual(config.rmsprop_decay, 0.99)
        self.assertEqual(config.seed, 0)

    def test_snr_range_is_expanded(self):
        config = TrainRunConfig.from_document({
            'code': {'fixture': 'repetition3'},
            'snr_range_db': {'start': 1.0, 'stop': 3.0, 'step': 0.5},
        })
        self.assertEqual(config.snr_list_db, (1.0, 1.5, 2.0, 2.5, 3.0))

    def test_document_round_trip(self):
        config = TrainRunConfig.from_document({
            'code': {'fixture': 'bch15_7'},
            'snr_list_db': [2.0, 3.0],
            'shells': {'count': 50, 'gamma': 0.5},
            'training': {'learning_rate': {'initial': 0.01, 'drop_to': 0.001}, 'target_loss': 0.01},
            'seed': 12,
        })
        again = TrainRunConfig.from_document(config.to_document())
        self.assertEqual(again, config)
        self.assertEqual(again.to_document(), config.to_document())

    def test_overrides_win(self):
        config = TrainRunConfig.from_document({'code': {'fixture': 'repetition3'}, 'snr_list_db': [1.0],
                                               'seed': 3},
                                              overrides={'seed': 9, 'freeze_theta': True})
        self.assertEqual(config.seed, 9)
        self.assertTrue(config.freeze_theta)

    def test_errors_carry_key_paths(self):
        with self.assertRaises(ConfigError) as ctx:
            TrainRunConfig.from_document({
                'code': {'fixture': 'repetition3'},
                'snr_list_db': [1.0],
                'shells': {'gamma': 1.5},
                'training': {'batch_size': 0, 'colour': 'red'},
            })
        messages = '\n'.join(ctx.exception.messages)
        self.assertIn('shells.gamma:', messages)
        self.assertIn('training.colour: Unknown key.', messages)

    def test_both_snr_forms_rejected(self):
        with self.assertRaises(ConfigError):
            TrainRunConfig.from_document({
                'code': {'fixture': 'repetition3'},
                'snr_list_db': [1.0],
                'snr_range_db': {'start': 1.0, 'stop': 2.0, 'step': 1.0},
            })

    def test_code_needs_exactly_one_source(self):
        with self.assertRaises(ConfigError) as ctx:
            TrainRunConfig.from_document({'code': {}, 'snr_list_db': [1.0]})
        self.assertTrue(any(m.startswith('code:') for m in ctx.exception.messages))

    def test_alist_path_resolves_against_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            (tmp / 'codes').mkdir()
            (tmp / 'codes' / 'rep.alist').write_text(fixture_path('repetition3').read_text())
            path = tmp / 'run.json'
            path.write_text(json.dumps({'code': {'alist': 'codes/rep.alist'}, 'snr_list_db': [1.0]}))
            config = load_run_config(path)
            self.assertEqual(config.code.n, 3)
            self.assertEqual(config.code.d_min, 3)
            self.assertTrue(Path(config.code_source['alist']).is_absolute())

    def test_missing_alist(self):
        with self.assertRaises(ConfigError) as ctx:
            TrainRunConfig.from_document({'code': {'alist': '/nonexistent/x.alist'}, 'snr_list_db': [1.0]})
        self.assertTrue(ctx.exception.messages[0].startswith('code.alist:'))

    def test_unreadable_config_file(self):
        with self.assertRaises(ConfigError):
            load_run_config('/nonexistent/run.json')
