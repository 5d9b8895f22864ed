"""
Training Checkpoints
Per-iteration checkpoint directories, the run manifest and resume

Layout of a run directory:
    manifest.json                config echo, seed, version, input digests
    report.json, loss.csv        latest run report and per-epoch losses
    iter_0000/ ... iter_NNNN/
        weights.bin              current weights
        best_weights.bin         best-validation weights so far
        optimizer.npy            RMSProp accumulator
        theta_snr{i}.csv         filled theta per training SNR
        theta_raw_snr{i}.csv     raw Monte Carlo theta (from iteration 1)
        state.json               counters, losses, history, random-stream states
"""
from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from django.utils import timezone

from codes.fixtures import fixture_path
from core.csvio import write_csv
from core.serializers import RunManifestSerializer, flatten_errors
from decoding.tanner import build_tanner
from decoding.weights import WeightSet
from sampling.profiles import read_theta_csv, write_theta_csv
from sampling.shells import is_pmf
from training.optim import OptimizerState
from .config import ConfigError, TrainRunConfig
from .loop import ActiveState, snr_states_for, random_streams, build_validation_set, report_for

logger = logging.getLogger('wbpdecode')

MANIFEST = 'manifest.json'
STATE = 'state.json'
LOSS_COLUMNS = ('outer_iter', 'epoch', 'learning_rate', 'train_loss')


def dump_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n')


def file_digest(path: Union[str, Path]) -> str:
    return 'sha256:' + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def iteration_dir(run_dir: Union[str, Path], iteration: int) -> Path:
    return Path(run_dir) / f"iter_{iteration:04d}"


def latest_checkpoint(run_dir: Union[str, Path]) -> Optional[Path]:
    dirs = sorted(p for p in Path(run_dir).glob('iter_[0-9]*') if (p / STATE).exists())
    return dirs[-1] if dirs else None


def write_manifest(run_dir: Path, config: TrainRunConfig, config_path: Optional[Path] = None) -> dict:
    """Config echo plus what is needed to reproduce the run."""
    from wbpdecode import __version__

    digests = {}
    if config_path is not None:
        digests['config'] = file_digest(config_path)
    source = config.code_source
    code_file = Path(source['alist']) if 'alist' in source else fixture_path(source['fixture'])
    digests['code'] = file_digest(code_file)
    manifest = {
        'config': config.to_document(),
        'seed': config.seed,
        'version': __version__,
        'created': timezone.now().isoformat(),
        'input_digests': digests,
    }
    run_dir.mkdir(parents=True, exist_ok=True)
    dump_json(run_dir / MANIFEST, manifest)
    return manifest


def read_manifest(run_dir: Union[str, Path]) -> TrainRunConfig:
    """Validate manifest.json and rebuild the run config from its echo."""
    path = Path(run_dir) / MANIFEST
    try:
        document = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError([f"manifest: Cannot read {path}: {e.strerror or e}"]) from e
    except json.JSONDecodeError as e:
        raise ConfigError([f"manifest: {path} is not valid JSON: {e.msg}"]) from e
    serializer = RunManifestSerializer(data=document)
    if not serializer.is_valid():
        raise ConfigError(flatten_errors(serializer.errors))
    return TrainRunConfig.from_document(document['config'])


class CheckpointWriter:
    """Iteration callback that persists the active state after every outer iteration."""

    def __init__(self, run_dir: Union[str, Path]):
        self.run_dir = Path(run_dir)

    def __call__(self, state: ActiveState):
        path = save_checkpoint(self.run_dir, state)
        report = report_for(state)
        dump_json(self.run_dir / 'report.json', report.to_dict())
        write_csv(self.run_dir / 'loss.csv', LOSS_COLUMNS, report.loss_rows())
        logger.info(f"Checkpoint written: {path}")


def save_checkpoint(run_dir: Union[str, Path], state: ActiveState) -> Path:
    path = iteration_dir(run_dir, state.iteration)
    try:
        path.mkdir(parents=True, exist_ok=True)
        state.weights.save(path / 'weights.bin')
        state.best_weights.save(path / 'best_weights.bin')
        state.optimizer.save_accumulator(path / 'optimizer.npy')
        for i, snr in enumerate(state.snr_states):
            write_theta_csv(path / f"theta_snr{i}.csv", snr.theta, snr.partition)
            if snr.raw_theta is not None:
                write_theta_csv(path / f"theta_raw_snr{i}.csv", snr.raw_theta, snr.partition)
        dump_json(path / STATE, {
            'iteration': state.iteration,
            'epochs_done': state.epochs_done,
            'stale': state.stale,
            'best_loss': state.best_loss,
            'best_iteration': state.best_iteration,
            'stop_reason': state.stop_reason,
            'optimizer': state.optimizer.to_dict(),
            'snr': [{'snr_db': s.snr_db, 'fallback': s.fallback, 'has_raw': s.raw_theta is not None}
                    for s in state.snr_states],
            'rng': {'batch': state.batch_rng.bit_generator.state,
                    'theta': state.theta_rng.bit_generator.state},
            'history': state.history,
        })
    except OSError as e:
        logger.error(f"Failed to write checkpoint {path}: {e}")
        raise
    return path


def _restore_rng(saved: dict) -> np.random.Generator:
    rng = np.random.default_rng()
    rng.bit_generator.state = saved
    return rng


def load_checkpoint(path: Union[str, Path], config: TrainRunConfig) -> ActiveState:
    """
    Rebuild the ActiveState saved in an iteration directory.

    Partitions, Chi masses and the validation set are recomputed from the
    config; everything stochastic or learned comes from the checkpoint.
    """
    path = Path(path)
    try:
        saved = json.loads((path / STATE).read_text())
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Cannot read checkpoint {path}: {e}")
        raise
    graph = build_tanner(config.code.pcm)
    weights = WeightSet.load(path / 'weights.bin')
    weights.check_compatible(graph, config.layers)

    snr_states = snr_states_for(config)
    if len(saved['snr']) != len(snr_states):
        raise ValueError(f"{path}: checkpoint has {len(saved['snr'])} SNRs, config has {len(snr_states)}")
    for i, (snr, record) in enumerate(zip(snr_states, saved['snr'])):
        snr.theta = read_theta_csv(path / f"theta_snr{i}.csv", gamma=config.gamma,
                                   expected_shells=config.shells)
        snr.theta.filled = saved['iteration'] > 0
        if record['has_raw']:
            snr.raw_theta = read_theta_csv(path / f"theta_raw_snr{i}.csv", gamma=config.gamma,
                                           expected_shells=config.shells)
        snr.fallback = record['fallback']
        snr.tilted = None if snr.fallback else is_pmf(snr.base_pmf, snr.theta)

    _, _, validation_rng = random_streams(config.seed)
    state = ActiveState(
        config=config,
        graph=graph,
        snr_states=snr_states,
        weights=weights,
        optimizer=OptimizerState.load(path / 'optimizer.npy', saved['optimizer']),
        best_weights=WeightSet.load(path / 'best_weights.bin'),
        best_loss=saved['best_loss'],
        best_iteration=saved['best_iteration'],
        iteration=saved['iteration'],
        epochs_done=saved['epochs_done'],
        stale=saved['stale'],
        stop_reason=saved['stop_reason'],
        history=saved['history'],
        batch_rng=_restore_rng(saved['rng']['batch']),
        theta_rng=_restore_rng(saved['rng']['theta']),
    )
    state.validation = build_validation_set(state, validation_rng)
    logger.info(f"Restored checkpoint {path} at iteration {state.iteration}")
    return state
