"""
Active Training Run Configuration
Typed run config built from a validated JSON document
"""
from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

from codes.alist import AlistFormatError, read_alist
from codes.fixtures import load_fixture
from codes.matrix import CodeSpec
from core.serializers import RunConfigSerializer, flatten_errors
from training.optim import LearningRateSchedule

logger = logging.getLogger('wbpdecode')


class ConfigError(ValueError):
    """Invalid run configuration; ``messages`` are ``key.path: message`` lines."""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__('; '.join(self.messages))


@dataclass(frozen=True)
class TrainRunConfig:
    """All hyperparameters of one active training run."""

    code: CodeSpec
    snr_list_db: Tuple[float, ...]
    shells: int = 100
    gamma: float = 0.7
    epsilon_tail: float = 1e-6
    tail_extend: int = 5
    layers: int = 5
    clip: float = 10.0
    batch_size: int = 512
    batches_per_epoch: int = 31
    epochs_per_outer: int = 20
    max_outer_iters: int = 5
    theta_test_samples: int = 20000
    validation_samples: int = 4000
    patience: int = 2
    target_loss: Optional[float] = None
    freeze_theta: bool = False
    learning_rate: LearningRateSchedule = field(default_factory=lambda: LearningRateSchedule(0.01))
    rmsprop_decay: float = 0.99
    rmsprop_epsilon: float = 1e-8
    seed: int = 0
    code_source: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        problems = []
        if not self.snr_list_db:
            problems.append("snr_list_db: At least one training SNR is required.")
        if not 0.0 < self.gamma <= 1.0:
            problems.append(f"shells.gamma: Must lie in (0, 1], got {self.gamma}.")
        for name in ('shells', 'layers', 'batch_size', 'batches_per_epoch', 'epochs_per_outer',
                     'theta_test_samples', 'validation_samples', 'patience'):
            if getattr(self, name) < 1:
                problems.append(f"{name}: Must be positive.")
        if self.max_outer_iters < 0:
            problems.append("training.max_outer_iters: Must be nonnegative.")
        if problems:
            raise ConfigError(problems)

    @property
    def samples_per_epoch(self) -> int:
        return self.batch_size * self.batches_per_epoch

    @property
    def total_epochs(self) -> int:
        return self.max_outer_iters * self.epochs_per_outer

    @classmethod
    def from_document(cls, document: dict, base_dir: Optional[Path] = None,
                      overrides: Optional[dict] = None) -> 'TrainRunConfig':
        """
        Validate a config document and resolve its code.

        Args:
            document: Parsed JSON config
            base_dir: Directory relative ALIST paths are resolved against
            overrides: Extra validated values (``seed``, ``freeze_theta``)

        Raises:
            ConfigError: on any validation failure, with key paths
        """
        serializer = RunConfigSerializer(data=document)
        if not serializer.is_valid():
            raise ConfigError(flatten_errors(serializer.errors))
        data = serializer.validated_data
        overrides = overrides or {}

        source = dict(data['code'])
        if 'alist' in source:
            path = Path(source['alist'])
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            try:
                pcm = read_alist(path)
            except OSError as e:
                raise ConfigError([f"code.alist: Cannot read {path}: {e.strerror or e}"]) from e
            except AlistFormatError as e:
                raise ConfigError([f"code.alist: {e}"]) from e
            source['alist'] = str(path.resolve())
            code = CodeSpec.from_pcm(pcm, d_min=source.get('d_min'), name=path.stem)
        else:
            code = load_fixture(source['fixture'])
            if source.get('d_min') is not None:
                code = CodeSpec(pcm=code.pcm, k=code.k, d_min=source['d_min'], name=code.name)

        decoder, shells, training = data['decoder'], data['shells'], data['training']
        lr = training['learning_rate']
        return cls(
            code=code,
            snr_list_db=tuple(float(s) for s in data['snr_list_db']),
            shells=shells['count'],
            gamma=shells['gamma'],
            epsilon_tail=shells['epsilon_tail'],
            tail_extend=shells['tail_extend'],
            layers=decoder['iterations'],
            clip=decoder['clip'],
            batch_size=training['batch_size'],
            batches_per_epoch=training['batches_per_epoch'],
            epochs_per_outer=training['epochs_per_outer'],
            max_outer_iters=training['max_outer_iters'],
            theta_test_samples=training['theta_test_samples'],
            validation_samples=training['validation_samples'],
            patience=training['patience'],
            target_loss=training['target_loss'],
            freeze_theta=overrides.get('freeze_theta', training['freeze_theta']),
            learning_rate=LearningRateSchedule(lr['initial'], lr['drop_to'], lr['drop_at_fraction']),
            rmsprop_decay=training['rmsprop']['decay'],
            rmsprop_epsilon=training['rmsprop']['epsilon'],
            seed=overrides.get('seed', data['seed']),
            code_source=source,
        )

    def to_document(self) -> dict:
        """Canonical config echo; from_document(to_document()) == self."""
        return {
            'code': copy.deepcopy(self.code_source),
            'snr_list_db': list(self.snr_list_db),
            'decoder': {'iterations': self.layers, 'clip': self.clip},
            'shells': {'count': self.shells, 'gamma': self.gamma,
                       'epsilon_tail': self.epsilon_tail, 'tail_extend': self.tail_extend},
            'training': {
                'batch_size': self.batch_size,
                'batches_per_epoch': self.batches_per_epoch,
                'epochs_per_outer': self.epochs_per_outer,
                'max_outer_iters': self.max_outer_iters,
                'theta_test_samples': self.theta_test_samples,
                'validation_samples': self.validation_samples,
                'patience': self.patience,
                'target_loss': self.target_loss,
                'freeze_theta': self.freeze_theta,
                'learning_rate': {'initial': self.learning_rate.initial,
                                  'drop_to': self.learning_rate.drop_to,
                                  'drop_at_fraction': self.learning_rate.drop_at_fraction},
                'rmsprop': {'decay': self.rmsprop_decay, 'epsilon': self.rmsprop_epsilon},
            },
            'seed': self.seed,
        }


def load_run_config(path: Union[str, Path], overrides: Optional[dict] = None) -> TrainRunConfig:
    """Read a JSON config file; relative ALIST paths resolve against its directory."""
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except OSError as e:
        logger.error(f"Cannot read config {path}: {e}")
        raise ConfigError([f"config: Cannot read {path}: {e.strerror or e}"]) from e
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: {path} is not valid JSON (line {e.lineno}): {e.msg}"]) from e
    config = TrainRunConfig.from_document(document, base_dir=path.parent, overrides=overrides)
    logger.info(f"Loaded run config {path.name}: code={config.code.name} "
                f"snr={list(config.snr_list_db)} seed={config.seed}")
    return config
