"""
Importance-Sampling Active Training Loop
Per-shell error estimation, tilted sampling and RMSProp training of the WBP decoder

One outer iteration:
    1. draw the epoch's training set from each SNR's tilted shell pmf
    2. run N2 epochs of RMSProp on the multiloss
    3. score the weights on the fixed validation set
    4. re-estimate theta per shell, fill and threshold it, re-tilt the pmf
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from decoding.channel import llr, snr_to_sigma
from decoding.engine import WBPDecoder, wbp_forward
from decoding.tanner import TannerGraph, build_tanner
from decoding.weights import WeightSet
from sampling.profiles import ThetaProfile, fill_theta
from sampling.shells import (
    DegenerateProfileError, RadialPmf, ShellPartition, build_partition, is_pmf,
    sample_noise, shell_masses,
)
from training.backprop import backward
from training.loss import bce_multiloss
from training.optim import OptimizerState, rmsprop_step
from .config import TrainRunConfig

logger = logging.getLogger('wbpdecode')

# Decode chunk for theta estimation and validation
DECODE_CHUNK = 10_000


@dataclass
class SnrShellState:
    """Shell bookkeeping for one training SNR."""

    snr_db: float
    sigma: float
    partition: ShellPartition
    base_pmf: RadialPmf
    theta: ThetaProfile
    raw_theta: Optional[ThetaProfile] = None
    tilted: Optional[RadialPmf] = None
    fallback: bool = False

    @property
    def sampling_pmf(self) -> RadialPmf:
        """Tilted pmf, or the Chi masses when the profile collapsed."""
        if self.fallback or self.tilted is None:
            return self.base_pmf
        return self.tilted


@dataclass
class TrainingBatch:
    llr: np.ndarray
    labels: np.ndarray
    snr_index: np.ndarray
    shell_index: np.ndarray

    def __len__(self):
        return self.llr.shape[0]


@dataclass
class ActiveState:
    """Everything the loop mutates; checkpoints persist exactly this."""

    config: TrainRunConfig
    graph: TannerGraph
    snr_states: List[SnrShellState]
    weights: WeightSet
    optimizer: OptimizerState
    best_weights: WeightSet
    best_loss: float
    best_iteration: int = 0
    iteration: int = 0
    epochs_done: int = 0
    stale: int = 0
    stop_reason: Optional[str] = None
    history: List[dict] = field(default_factory=list)
    batch_rng: Optional[np.random.Generator] = None
    theta_rng: Optional[np.random.Generator] = None
    validation: Optional[TrainingBatch] = None

    def decoder(self, weights: Optional[WeightSet] = None) -> WBPDecoder:
        return WBPDecoder(self.graph, self.weights if weights is None else weights,
                          self.config.layers, self.config.clip)


@dataclass
class RunReport:
    """Loss curves, theta snapshots and the stop reason of a run."""

    iterations: List[dict]
    best_iteration: int
    best_validation_loss: float
    stop_reason: str

    def loss_rows(self):
        """(outer_iter, epoch, learning_rate, train_loss) per epoch."""
        for record in self.iterations:
            for epoch, (rate, loss) in enumerate(zip(record['learning_rates'], record['train_losses'])):
                yield record['iteration'], epoch, rate, loss

    def to_dict(self) -> dict:
        return {
            'best_iteration': self.best_iteration,
            'best_validation_loss': self.best_validation_loss,
            'stop_reason': self.stop_reason,
            'iterations': self.iterations,
        }


def split_evenly(total: int, parts: int) -> List[int]:
    """Even split with the remainder handed out round-robin from the first part."""
    return [total // parts + (1 if i < total % parts else 0) for i in range(parts)]


def estimate_theta(decoder: WBPDecoder, partition: ShellPartition, sampling_pmf: RadialPmf,
                   num_samples: int, sigma: float, rng: np.random.Generator,
                   gamma: float = 1.0) -> ThetaProfile:
    """
    Monte Carlo error ratio per shell.

    Noise is drawn shell-first from ``sampling_pmf``; theta_l is the fraction
    of decoding failures among the samples that landed in shell l. Shells no
    sample visited get theta 0 with counts (0, 0).

    Args:
        decoder: Decoder whose error region is probed (weights frozen)
        partition: Shell partition for this sigma
        sampling_pmf: pmf the test samples are drawn from
        num_samples: Number of noise vectors
        sigma: Noise standard deviation
        rng: Random stream owned by the caller

    Returns:
        Raw ThetaProfile with per-shell counts
    """
    if num_samples < 1:
        raise ValueError(f"Need at least one test sample, got {num_samples}")
    if sampling_pmf.partition != partition:
        raise ValueError("Sampling pmf was built on a different partition")
    errors = np.zeros(partition.count, dtype=np.int64)
    trials = np.zeros(partition.count, dtype=np.int64)
    for size in split_evenly(num_samples, -(-num_samples // DECODE_CHUNK)):
        z, shells = sample_noise(sampling_pmf, rng, size=size)
        failed = decoder.bit_errors(z, sigma).any(axis=1)
        trials += np.bincount(shells, minlength=partition.count)
        errors += np.bincount(shells[failed], minlength=partition.count)
    return ThetaProfile.from_counts(errors, trials, gamma=gamma)


def build_training_batch(state: ActiveState, batch_size: int,
                         rng: np.random.Generator) -> TrainingBatch:
    """
    All-zero-codeword training samples spread evenly over the training SNRs.

    Each SNR's share is drawn from its current sampling pmf; the combined set
    is shuffled so every minibatch mixes SNRs.
    """
    n = state.graph.n_vars
    llrs, snr_index, shells = [], [], []
    for i, (snr, count) in enumerate(zip(state.snr_states, split_evenly(batch_size, len(state.snr_states)))):
        if count == 0:
            continue
        z, shell = sample_noise(snr.sampling_pmf, rng, size=count)
        llrs.append(llr(1.0 + z, snr.sigma))
        snr_index.append(np.full(count, i, dtype=np.int64))
        shells.append(shell)
    order = rng.permutation(batch_size)
    return TrainingBatch(
        llr=np.concatenate(llrs)[order],
        labels=np.zeros((batch_size, n), dtype=np.uint8),
        snr_index=np.concatenate(snr_index)[order],
        shell_index=np.concatenate(shells)[order],
    )


def validation_loss(state: ActiveState, weights: WeightSet) -> float:
    """Multiloss of ``weights`` on the fixed validation set."""
    batch = state.validation
    total = 0.0
    for start in range(0, len(batch), DECODE_CHUNK):
        stop = min(start + DECODE_CHUNK, len(batch))
        trace = wbp_forward(state.graph, weights, batch.llr[start:stop], state.config.layers, state.config.clip)
        total += bce_multiloss(trace, batch.labels[start:stop]) * (stop - start)
    return total / len(batch)


def random_streams(seed: int):
    """Independent batch, theta and validation streams derived from one seed."""
    batch_seq, theta_seq, validation_seq = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(batch_seq), np.random.default_rng(theta_seq),
            np.random.default_rng(validation_seq))


def snr_states_for(config: TrainRunConfig) -> List[SnrShellState]:
    states = []
    for snr_db in config.snr_list_db:
        sigma = snr_to_sigma(snr_db, config.code.rate)
        partition = build_partition(config.code.n, sigma, config.shells, config.epsilon_tail)
        base = shell_masses(partition)
        theta = ThetaProfile.uniform(config.shells, gamma=config.gamma)
        states.append(SnrShellState(snr_db=snr_db, sigma=sigma, partition=partition, base_pmf=base,
                                    theta=theta, tilted=is_pmf(base, theta)))
        logger.info(f"SNR {snr_db} dB: sigma={sigma:.6g}, shells [{partition.r_min:.6g}, "
                    f"{partition.r_max:.6g}] x {config.shells}")
    return states


def build_validation_set(state: ActiveState, rng: np.random.Generator) -> TrainingBatch:
    """
    Held-out samples from the untilted Chi masses of every SNR.

    Drawn once per run and never re-tilted, so validation losses of
    different iterations score the same noise.
    """
    n = state.graph.n_vars
    llrs, snr_index, shells = [], [], []
    counts = split_evenly(state.config.validation_samples, len(state.snr_states))
    for i, (snr, count) in enumerate(zip(state.snr_states, counts)):
        if count == 0:
            continue
        z, shell = sample_noise(snr.base_pmf, rng, size=count)
        llrs.append(llr(1.0 + z, snr.sigma))
        snr_index.append(np.full(count, i, dtype=np.int64))
        shells.append(shell)
    total = state.config.validation_samples
    return TrainingBatch(llr=np.concatenate(llrs), labels=np.zeros((total, n), dtype=np.uint8),
                         snr_index=np.concatenate(snr_index), shell_index=np.concatenate(shells))


def initial_state(config: TrainRunConfig) -> ActiveState:
    """Iteration 0: unit weights, theta = 1 everywhere, tilted pmf = Chi masses."""
    graph = build_tanner(config.code.pcm)
    weights = WeightSet.ones(graph, config.layers)
    batch_rng, theta_rng, validation_rng = random_streams(config.seed)
    state = ActiveState(
        config=config,
        graph=graph,
        snr_states=snr_states_for(config),
        weights=weights,
        optimizer=OptimizerState.for_weights(weights, config.learning_rate.initial,
                                             config.rmsprop_decay, config.rmsprop_epsilon),
        best_weights=weights.copy(),
        best_loss=float('inf'),
        batch_rng=batch_rng,
        theta_rng=theta_rng,
    )
    state.validation = build_validation_set(state, validation_rng)
    state.best_loss = validation_loss(state, weights)
    state.history.append(_iteration_record(state, [], [], state.best_loss))
    logger.info(f"Iteration 0 (unit weights): validation loss {state.best_loss:.6g}")
    return state


def _iteration_record(state: ActiveState, learning_rates, train_losses, val_loss) -> dict:
    return {
        'iteration': state.iteration,
        'learning_rates': list(learning_rates),
        'train_losses': list(train_losses),
        'validation_loss': val_loss,
        'snr': [
            {
                'snr_db': s.snr_db,
                'theta_raw': None if s.raw_theta is None else s.raw_theta.theta.tolist(),
                'theta_filled': s.theta.theta.tolist(),
                'sampling_pmf': s.sampling_pmf.masses.tolist(),
                'support': int(s.sampling_pmf.support.size),
                'fallback': s.fallback,
            }
            for s in state.snr_states
        ],
    }


def train_epochs(state: ActiveState, batch: TrainingBatch) -> Tuple[List[float], List[float]]:
    """N2 epochs of minibatch RMSProp over one training set; returns (rates, epoch losses)."""
    config = state.config
    rates, losses = [], []
    for _ in range(config.epochs_per_outer):
        rate = config.learning_rate.rate_at(state.epochs_done, config.total_epochs)
        state.optimizer = state.optimizer.with_learning_rate(rate)
        batch_losses = []
        for b in range(config.batches_per_epoch):
            sl = slice(b * config.batch_size, (b + 1) * config.batch_size)
            loss, grads = backward(state.graph, state.weights, batch.llr[sl], batch.labels[sl],
                                   config.layers, config.clip)
            state.weights, state.optimizer = rmsprop_step(state.weights, grads, state.optimizer)
            batch_losses.append(loss)
        state.epochs_done += 1
        rates.append(rate)
        losses.append(float(np.mean(batch_losses)))
    return rates, losses


def update_theta(state: ActiveState):
    """Re-estimate, fill and threshold theta for every SNR, then re-tilt."""
    config = state.config
    decoder = state.decoder()
    counts = split_evenly(config.theta_test_samples, len(state.snr_states))
    for snr, count in zip(state.snr_states, counts):
        if count == 0:
            continue
        raw = estimate_theta(decoder, snr.partition, snr.sampling_pmf, count, snr.sigma,
                             state.theta_rng, gamma=config.gamma)
        snr.raw_theta = raw
        snr.theta = fill_theta(raw, snr.partition, config.gamma, config.tail_extend)
        try:
            snr.tilted = is_pmf(snr.base_pmf, snr.theta)
            snr.fallback = False
        except DegenerateProfileError:
            snr.tilted = None
            snr.fallback = True
            logger.warning(f"Iteration {state.iteration}, SNR {snr.snr_db} dB: filled theta is all zero; "
                           f"sampling from the Chi masses next iteration")
        logger.info(f"Iteration {state.iteration}, SNR {snr.snr_db} dB: "
                    f"{int(raw.trials.sum())} test samples, {int(raw.errors.sum())} errors, "
                    f"pmf support {snr.sampling_pmf.support.size}/{snr.partition.count}")


def run_iteration(state: ActiveState):
    """One outer iteration; updates best checkpoint, patience and stop reason."""
    config = state.config
    state.iteration += 1
    batch = build_training_batch(state, config.samples_per_epoch, state.batch_rng)
    rates, losses = train_epochs(state, batch)
    val = validation_loss(state, state.weights)

    if val < state.best_loss:
        state.best_loss = val
        state.best_weights = state.weights.copy()
        state.best_iteration = state.iteration
        state.stale = 0
    else:
        state.stale += 1

    if not config.freeze_theta:
        update_theta(state)
    state.history.append(_iteration_record(state, rates, losses, val))
    logger.info(f"Iteration {state.iteration}: lr={rates[-1]:.3g} train loss {losses[-1]:.6g}, "
                f"validation loss {val:.6g} (best {state.best_loss:.6g} at {state.best_iteration})")

    if config.target_loss is not None and val <= config.target_loss:
        state.stop_reason = 'target_loss'
    elif state.stale >= config.patience:
        state.stop_reason = 'patience'
    elif state.iteration >= config.max_outer_iters:
        state.stop_reason = 'max_outer_iters'


def report_for(state: ActiveState) -> RunReport:
    return RunReport(iterations=state.history, best_iteration=state.best_iteration,
                     best_validation_loss=state.best_loss,
                     stop_reason=state.stop_reason or 'running')


def active_train(config: TrainRunConfig, state: Optional[ActiveState] = None,
                 on_iteration: Optional[Callable[[ActiveState], None]] = None) -> Tuple[WeightSet, RunReport]:
    """
    Train a WBP decoder with importance-sampled active learning.

    Starts from unit weights (plain BP) and theta = 1, or continues from a
    restored ``state``. Stops when the validation loss has not improved for
    ``patience`` iterations, when it reaches ``target_loss``, or after
    ``max_outer_iters`` iterations.

    Args:
        config: Run configuration (seed included)
        state: Restored state to resume from
        on_iteration: Called after iteration 0 and every outer iteration (checkpointing)

    Returns:
        (best-validation WeightSet, RunReport)
    """
    if state is None:
        state = initial_state(config)
        if config.max_outer_iters == 0:
            state.stop_reason = 'max_outer_iters'
        if on_iteration is not None:
            on_iteration(state)
    else:
        logger.info(f"Resuming at iteration {state.iteration} (stop reason {state.stop_reason})")

    while state.stop_reason is None:
        run_iteration(state)
        if on_iteration is not None:
            on_iteration(state)

    logger.info(f"Training stopped ({state.stop_reason}); best iteration {state.best_iteration}, "
                f"validation loss {state.best_loss:.6g}")
    return state.best_weights, report_for(state)
