"""
RMSProp Optimizer
Running mean-square gradient scaling and the step learning-rate schedule
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from decoding.weights import GradientSet, WeightSet

logger = logging.getLogger('wbpdecode')


@dataclass(frozen=True)
class LearningRateSchedule:
    """
    Constant rate, optionally dropped once to ``drop_to`` after
    ``drop_at_fraction`` of the epoch budget.
    """

    initial: float
    drop_to: Optional[float] = None
    drop_at_fraction: float = 0.5

    def __post_init__(self):
        if self.initial <= 0 or (self.drop_to is not None and self.drop_to <= 0):
            raise ValueError("Learning rates must be positive")
        if not 0.0 <= self.drop_at_fraction <= 1.0:
            raise ValueError(f"drop_at_fraction must lie in [0, 1], got {self.drop_at_fraction}")

    def rate_at(self, epoch: int, total_epochs: int) -> float:
        """Learning rate for a 0-based global epoch index."""
        if self.drop_to is None or total_epochs <= 0:
            return self.initial
        if epoch >= int(round(self.drop_at_fraction * total_epochs)):
            return self.drop_to
        return self.initial


@dataclass(frozen=True)
class OptimizerState:
    """RMSProp accumulator, flat in WeightSet.to_vector order."""

    accumulator: np.ndarray
    learning_rate: float
    decay: float = 0.99
    epsilon: float = 1e-8
    steps: int = 0

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"RMSProp decay must lie in (0, 1), got {self.decay}")
        if self.epsilon <= 0 or self.learning_rate <= 0:
            raise ValueError("RMSProp epsilon and learning rate must be positive")
        if (np.asarray(self.accumulator) < 0).any():
            raise ValueError("RMSProp accumulator must be nonnegative")

    @classmethod
    def for_weights(cls, weights: WeightSet, learning_rate: float,
                    decay: float = 0.99, epsilon: float = 1e-8) -> 'OptimizerState':
        return cls(accumulator=np.zeros(weights.to_vector().size), learning_rate=learning_rate,
                   decay=decay, epsilon=epsilon)

    def with_learning_rate(self, learning_rate: float) -> 'OptimizerState':
        return replace(self, learning_rate=learning_rate)

    def to_dict(self) -> dict:
        """Scalar fields; the accumulator is stored separately."""
        return {'learning_rate': self.learning_rate, 'decay': self.decay,
                'epsilon': self.epsilon, 'steps': self.steps}

    def save_accumulator(self, path: Union[str, Path]):
        buffer = io.BytesIO()
        np.save(buffer, np.asarray(self.accumulator, dtype='<f8'), allow_pickle=False)
        Path(path).write_bytes(buffer.getvalue())

    @classmethod
    def load(cls, path: Union[str, Path], scalars: dict) -> 'OptimizerState':
        try:
            accumulator = np.load(Path(path), allow_pickle=False)
        except (OSError, ValueError) as e:
            logger.error(f"Cannot read optimizer state {path}: {e}")
            raise
        return cls(accumulator=accumulator.astype(np.float64), **scalars)


def rmsprop_step(weights: WeightSet, grads: GradientSet,
                 state: OptimizerState) -> Tuple[WeightSet, OptimizerState]:
    """
    acc <- decay * acc + (1 - decay) * g^2;  w <- w - lr * g / sqrt(acc + eps)

    Returns new (weights, state); the inputs are left untouched.
    """
    if grads.shape != weights.shape:
        raise ValueError(f"Gradient shape {grads.shape} does not match weights {weights.shape}")
    g = grads.to_vector()
    if g.size != np.asarray(state.accumulator).size:
        raise ValueError("Optimizer state does not match the weight vector")
    acc = state.decay * state.accumulator + (1.0 - state.decay) * g * g
    w = weights.to_vector() - state.learning_rate * g / np.sqrt(acc + state.epsilon)
    return (WeightSet.from_vector(w, weights.shape),
            replace(state, accumulator=acc, steps=state.steps + 1))
