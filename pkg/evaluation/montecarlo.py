"""
Monte Carlo Error Rates
BER/FER estimation of a WBP decoder on BPSK-AWGN, SNR sweeps and decoding gains

Blocks are all-zero codewords. A point stops once it has collected
``min_block_errors`` block errors or decoded ``max_blocks`` blocks, whichever
comes first; the stats record which bound ended it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from django.conf import settings

from codes.matrix import CodeSpec
from core.csvio import write_csv
from core.parallel import ChunkRunner
from decoding.channel import awgn_noise, snr_to_sigma
from decoding.engine import DEFAULT_CLIP, block_errors
from decoding.tanner import build_tanner
from decoding.weights import WeightSet

logger = logging.getLogger('wbpdecode')

CSV_COLUMNS = ('snr_db', 'blocks', 'block_errors', 'bit_errors', 'fer', 'ber', 'converged')

# Blocks per wbp_forward call inside a chunk (bounds the trace memory)
DECODE_BATCH = 1000


@dataclass(frozen=True)
class ErrorStats:
    """Counts for one SNR point."""

    snr_db: float
    n: int
    blocks: int
    block_errors: int
    bit_errors: int
    converged: bool
    valid: bool = True

    def __post_init__(self):
        if not 0 <= self.block_errors <= self.blocks:
            raise ValueError(f"block_errors={self.block_errors} outside [0, blocks={self.blocks}]")
        if not self.block_errors <= self.bit_errors <= self.blocks * self.n:
            raise ValueError(f"bit_errors={self.bit_errors} inconsistent with {self.block_errors} "
                             f"block errors over {self.blocks} blocks of length {self.n}")

    @classmethod
    def empty(cls, snr_db: float, n: int) -> 'ErrorStats':
        """Zero-filled stats for a point with no decode budget."""
        return cls(snr_db=snr_db, n=n, blocks=0, block_errors=0, bit_errors=0,
                   converged=False, valid=False)

    @property
    def fer(self) -> float:
        return self.block_errors / self.blocks if self.blocks else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.blocks * self.n) if self.blocks else 0.0

    @property
    def bound(self) -> str:
        """'errors' when the block-error target was met, 'budget' when max_blocks ended it."""
        if not self.valid:
            return 'empty'
        return 'errors' if self.converged else 'budget'

    def csv_row(self) -> tuple:
        return (self.snr_db, self.blocks, self.block_errors, self.bit_errors,
                self.fer, self.ber, int(self.converged))


def _simulate_chunk(task) -> Tuple[int, int, int]:
    """(blocks, block_errors, bit_errors) for one seeded chunk; runs in a worker."""
    graph, weights, sigma, layers, clip, blocks, seed = task
    rng = np.random.default_rng(seed)
    z = awgn_noise(graph.n_vars, sigma, rng, size=blocks)
    frames = bits = 0
    for start in range(0, blocks, DECODE_BATCH):
        per_block = block_errors(graph, weights, z[start:start + DECODE_BATCH], sigma, layers, clip).sum(axis=1)
        frames += int(np.count_nonzero(per_block))
        bits += int(per_block.sum())
    return blocks, frames, bits


def _seed_sequence(seed) -> np.random.SeedSequence:
    # Fresh copy: chunk children are always counted from zero
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size)
    return np.random.SeedSequence(seed)


def monte_carlo_errors(weights: Optional[WeightSet], code: CodeSpec, snr_db: float,
                       min_block_errors: Optional[int] = None, max_blocks: Optional[int] = None,
                       seed=0, layers: Optional[int] = None, clip: float = DEFAULT_CLIP,
                       chunk_blocks: Optional[int] = None, workers: Optional[int] = None) -> ErrorStats:
    """
    Simulate one SNR point until enough block errors or the block budget.

    Chunk i always uses the i-th child of the seed sequence, and chunks are
    reduced in order, so the result does not depend on the worker count.

    Args:
        weights: Decoder weights (None for plain BP with ``layers`` iterations)
        code: Code under test
        snr_db: Eb/N0 in dB
        min_block_errors: Block-error target (default WBPDECODE_CONFIG['MIN_BLOCK_ERRORS'])
        max_blocks: Block budget (default WBPDECODE_CONFIG['MAX_BLOCKS'])
        seed: int or SeedSequence
        layers: Iterations L (defaults to weights.layers)
        clip: CN message clip
        chunk_blocks: Blocks per work chunk
        workers: Process count (default WBPDECODE_CONFIG['WORKERS'])

    Returns:
        ErrorStats
    """
    project = settings.WBPDECODE_CONFIG
    min_block_errors = project['MIN_BLOCK_ERRORS'] if min_block_errors is None else min_block_errors
    max_blocks = project['MAX_BLOCKS'] if max_blocks is None else max_blocks
    chunk_blocks = chunk_blocks or project['CHUNK_BLOCKS']
    if min_block_errors < 1:
        raise ValueError(f"min_block_errors must be at least 1, got {min_block_errors}")
    if max_blocks < 0 or chunk_blocks < 1:
        raise ValueError(f"Need max_blocks >= 0 and chunk_blocks >= 1, got {max_blocks}, {chunk_blocks}")

    graph, rate = build_tanner(code.pcm), code.rate
    if layers is None:
        layers = weights.layers if weights is not None else project['ITERATIONS']
    if weights is None:
        weights = WeightSet.ones(graph, layers)
    weights.check_compatible(graph, layers)
    sigma = snr_to_sigma(snr_db, rate)
    if max_blocks == 0:
        logger.warning(f"SNR {snr_db} dB: no decode budget, reporting empty stats")
        return ErrorStats.empty(snr_db, graph.n_vars)

    sequence = _seed_sequence(seed)
    blocks = frames = bits = 0
    with ChunkRunner(workers) as runner:
        while frames < min_block_errors and blocks < max_blocks:
            sizes = []
            planned = blocks
            while len(sizes) < runner.workers and planned < max_blocks:
                sizes.append(min(chunk_blocks, max_blocks - planned))
                planned += sizes[-1]
            seeds = sequence.spawn(len(sizes))
            tasks = [(graph, weights, sigma, layers, clip, size, s) for size, s in zip(sizes, seeds)]
            for done, chunk_frames, chunk_bits in runner.map(_simulate_chunk, tasks):
                blocks += done
                frames += chunk_frames
                bits += chunk_bits
                if frames >= min_block_errors:
                    break

    stats = ErrorStats(snr_db=snr_db, n=graph.n_vars, blocks=blocks, block_errors=frames,
                       bit_errors=bits, converged=frames >= min_block_errors)
    logger.info(f"SNR {snr_db} dB: {frames} block errors in {blocks} blocks "
                f"(FER {stats.fer:.3e}, BER {stats.ber:.3e}, {stats.bound}-bound)")
    return stats


def sweep(weights: Optional[WeightSet], code: CodeSpec, snr_grid: Sequence[float],
          min_block_errors: Optional[int] = None, max_blocks: Optional[int] = None,
          seed=0, layers: Optional[int] = None, clip: float = DEFAULT_CLIP,
          chunk_blocks: Optional[int] = None, workers: Optional[int] = None) -> List[ErrorStats]:
    """
    monte_carlo_errors at every grid point.

    Every point starts from the same seed, so the curves are built on common
    random numbers and a one-point sweep equals monte_carlo_errors.
    """
    if len(snr_grid) == 0:
        raise ValueError("SNR grid is empty")
    return [
        monte_carlo_errors(weights, code, snr_db, min_block_errors, max_blocks, seed,
                           layers, clip, chunk_blocks, workers)
        for snr_db in snr_grid
    ]


def write_sweep_csv(destination: Union[str, TextIO], stats: Iterable[ErrorStats]):
    write_csv(destination, CSV_COLUMNS, (s.csv_row() for s in stats))


def snr_at(stats: Sequence[ErrorStats], target: float, metric: str = 'ber') -> Optional[float]:
    """
    SNR at which a curve first falls to ``target``, interpolating log10 of the
    metric linearly in dB between grid points. None if it never gets there.

    A point with no errors at all is taken as the crossing itself.
    """
    if metric not in ('ber', 'fer'):
        raise ValueError(f"metric must be 'ber' or 'fer', got {metric!r}")
    if not target > 0:
        raise ValueError(f"target must be positive, got {target}")
    previous = None
    for s in sorted((s for s in stats if s.valid), key=lambda s: s.snr_db):
        value = getattr(s, metric)
        if value <= target:
            if previous is None or value <= 0:
                return s.snr_db
            lo, hi = np.log10(getattr(previous, metric)), np.log10(value)
            fraction = (lo - np.log10(target)) / (lo - hi)
            return float(previous.snr_db + fraction * (s.snr_db - previous.snr_db))
        previous = s
    return None


def snr_gain(reference: Sequence[ErrorStats], improved: Sequence[ErrorStats], target: float,
             metric: str = 'ber') -> Optional[float]:
    """dB the improved curve saves over the reference at ``target`` (positive is better)."""
    ref = snr_at(reference, target, metric)
    new = snr_at(improved, target, metric)
    if ref is None or new is None:
        return None
    return ref - new
