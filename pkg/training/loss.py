"""
Multiloss
Binary cross-entropy summed over the soft outputs of every decoder layer
"""
import numpy as np

from decoding.engine import DecodeTrace

# x_hat is clamped into [LOG_CLAMP, 1 - LOG_CLAMP] before the log
LOG_CLAMP = 1e-12


def labels_for(trace: DecodeTrace, c) -> np.ndarray:
    """Broadcast a codeword (n,) or a batch (B, n) against the trace."""
    layers, batch, n = trace.x_hat.shape
    labels = np.asarray(c, dtype=np.float64)
    if labels.shape not in ((n,), (batch, n)):
        raise ValueError(f"Labels of shape {labels.shape} do not match a batch of {batch} words of length {n}")
    return np.broadcast_to(labels, (batch, n))


def per_sample_multiloss(trace: DecodeTrace, c) -> np.ndarray:
    """(B,) losses: -(1/n) sum_l sum_v [c log x + (1 - c) log(1 - x)]."""
    labels = labels_for(trace, c)
    x = np.clip(trace.x_hat, LOG_CLAMP, 1.0 - LOG_CLAMP)
    n = labels.shape[1]
    terms = labels * np.log(x) + (1.0 - labels) * np.log1p(-x)
    return -terms.sum(axis=(0, 2)) / n


def bce_multiloss(trace: DecodeTrace, c) -> float:
    """Batch mean of the per-sample multiloss."""
    return float(per_sample_multiloss(trace, c).mean())
