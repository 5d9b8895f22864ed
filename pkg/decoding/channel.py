"""
BPSK / AWGN Channel Utilities
SNR conversions, noise generation and channel LLRs
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np


def _check_rate(rate: float):
    if not 0.0 < rate < 1.0:
        raise ValueError(f"Code rate must lie in (0, 1), got {rate}")


def snr_to_sigma(snr_db: float, rate: float) -> float:
    """
    Noise standard deviation for an Eb/N0 given in dB.

    sigma = 1 / sqrt(2 * rate * 10^(snr_db / 10))
    """
    _check_rate(rate)
    return 1.0 / math.sqrt(2.0 * rate * 10.0 ** (snr_db / 10.0))


def sigma_to_snr(sigma: float, rate: float) -> float:
    """Inverse of snr_to_sigma, in dB."""
    _check_rate(rate)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


def train_snr_guideline(snr_test_db: float, rate: float) -> float:
    """
    Training SNR guideline: min(snr_test, 10 log10(2^(2 rate) - 1)).
    """
    _check_rate(rate)
    cap = 10.0 * math.log10(2.0 ** (2.0 * rate) - 1.0)
    return min(snr_test_db, cap)


def snr_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive SNR grid, e.g. 5.5 to 6.5 in steps of 0.5."""
    if step <= 0:
        raise ValueError(f"SNR step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"SNR grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def bpsk(bits) -> np.ndarray:
    """Bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def awgn_noise(n: int, sigma: float, rng: np.random.Generator,
               size: Optional[int] = None) -> np.ndarray:
    """
    I.i.d. zero-mean Gaussian noise with standard deviation sigma.

    Returns shape (n,) or (size, n).
    """
    if n < 1 or sigma <= 0:
        raise ValueError(f"Need n >= 1 and sigma > 0, got n={n}, sigma={sigma}")
    shape: Union[int, Tuple[int, int]] = n if size is None else (size, n)
    return rng.normal(0.0, sigma, size=shape)


def llr(y, sigma: float) -> np.ndarray:
    """Channel LLRs 2 y / sigma^2 (positive favours bit 0)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma)


@dataclass(frozen=True)
class ChannelConfig:
    """Operating point of the BPSK-AWGN channel."""

    snr_db: float
    rate: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and positive, got {self.sigma}")

    @classmethod
    def from_snr(cls, snr_db: float, rate: float) -> 'ChannelConfig':
        return cls(snr_db=snr_db, rate=rate, sigma=snr_to_sigma(snr_db, rate))

    def received(self, z) -> np.ndarray:
        """Channel output for the all-zero codeword: all-ones plus noise."""
        return 1.0 + np.asarray(z, dtype=np.float64)

    def llr_for_noise(self, z) -> np.ndarray:
        return llr(self.received(z), self.sigma)
