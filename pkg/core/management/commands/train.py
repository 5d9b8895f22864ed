"""
Active training
Runs importance-sampled active training of a WBP decoder from a JSON config
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from active.checkpoints import (
    CheckpointWriter, latest_checkpoint, load_checkpoint, read_manifest, write_manifest,
)
from active.config import ConfigError, load_run_config
from active.loop import active_train
from core.cli import report_failure, runtime_error, usage_error

logger = logging.getLogger('wbpdecode')

FINAL_WEIGHTS = 'weights.bin'


class Command(BaseCommand):
    help = 'Train a weighted BP decoder with importance-sampled active learning'

    def add_arguments(self, parser):
        parser.add_argument('config', help='JSON run config')
        parser.add_argument('--run-dir', default=None,
                            help='Checkpoint directory (default RUNS_ROOT/<config name>)')
        parser.add_argument('--resume', nargs='?', const='latest', default=None,
                            help='Continue from a checkpoint directory (default: the latest in --run-dir)')
        parser.add_argument('--freeze-theta', action='store_true',
                            help='Keep theta = 1 (conventional WBP training)')
        parser.add_argument('--seed', type=int, default=None, help='Override config seed')

    def handle(self, *args, **options):
        config_path = Path(options['config'])
        overrides = {}
        if options['seed'] is not None:
            overrides['seed'] = options['seed']
        if options['freeze_theta']:
            overrides['freeze_theta'] = True
        try:
            config = load_run_config(config_path, overrides)
        except ConfigError as e:
            raise usage_error('\n'.join(e.messages)) from e

        run_dir = Path(options['run_dir'] or settings.WBPDECODE_CONFIG['RUNS_ROOT'] / config_path.stem)
        state = None
        try:
            if options['resume']:
                state = self._resume(run_dir, options['resume'], config)
            else:
                write_manifest(run_dir, config, config_path)
            weights, report = active_train(config, state=state, on_iteration=CheckpointWriter(run_dir))
            weights.save(run_dir / FINAL_WEIGHTS)
        except KeyboardInterrupt:
            raise runtime_error(f"Interrupted; continue with --resume --run-dir {run_dir}")
        except Exception as e:
            raise report_failure(e) from e

        self.stdout.write(self.style.SUCCESS(
            f"Training finished ({report.stop_reason}): best iteration {report.best_iteration}, "
            f"validation loss {report.best_validation_loss:.6g}"
        ))
        self.stdout.write(f"Weights: {run_dir / FINAL_WEIGHTS}")

    def _resume(self, run_dir: Path, checkpoint: str, config):
        try:
            recorded = read_manifest(run_dir)
        except ConfigError as e:
            raise usage_error('\n'.join(e.messages)) from e
        if recorded != config:
            raise usage_error(f"{run_dir}: config differs from the run manifest; resume needs the same config")
        path = latest_checkpoint(run_dir) if checkpoint == 'latest' else Path(checkpoint)
        if path is None:
            raise usage_error(f"{run_dir}: no checkpoint to resume from")
        logger.info(f"Resuming {run_dir} from {path}")
        return load_checkpoint(path, config)
