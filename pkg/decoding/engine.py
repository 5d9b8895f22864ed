"""
Weighted Belief Propagation Engine
Unrolled WBP forward pass, hard decisions, error indicator and the ML oracle
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from codes.matrix import CodeSpec
from .channel import bpsk, llr
from .tanner import TannerGraph, build_tanner, exclusive_products
from .weights import WeightSet

logger = logging.getLogger('wbpdecode')

# Clamp applied to tanh-domain messages and to the CN product before atanh
DELTA = 1e-12
DEFAULT_CLIP = 10.0


@dataclass
class DecodeTrace:
    """
    Every layer of one batched decode.

    vn_messages, cn_messages, vn_preactivations and cn_products are
    (L, B, E); x_hat is (L, B, n). The last two fields are what backward
    needs to rebuild the clamp masks.
    """

    vn_messages: np.ndarray
    cn_messages: np.ndarray
    x_hat: np.ndarray
    vn_preactivations: np.ndarray
    cn_products: np.ndarray
    llr: np.ndarray

    @property
    def layers(self) -> int:
        return self.x_hat.shape[0]

    @property
    def batch_size(self) -> int:
        return self.x_hat.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.x_hat[-1]


def _as_batch(values, n: int, label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise ValueError(f"{label} has shape {np.shape(values)}, expected ({n},) or (B, {n})")
    return arr


def wbp_forward(graph: TannerGraph, weights: WeightSet, lam, layers: int,
                clip: float = DEFAULT_CLIP) -> DecodeTrace:
    """
    Run the L-layer weighted BP network on channel LLRs.

    Args:
        graph: Tanner graph of the code
        weights: WeightSet dimensioned for (graph, layers)
        lam: Channel LLRs, shape (n,) or (B, n)
        layers: Number of unrolled iterations L
        clip: CN messages are clipped to [-clip, clip]

    Returns:
        DecodeTrace with a leading layer axis and a batch axis
    """
    if layers < 1:
        raise ValueError(f"Need at least one layer, got {layers}")
    if clip <= 0:
        raise ValueError(f"Message clip must be positive, got {clip}")
    weights.check_compatible(graph, layers)
    lam = _as_batch(lam, graph.n_vars, 'LLR vector')

    batch, n, E = lam.shape[0], graph.n_vars, graph.num_edges
    vn = np.empty((layers, batch, E))
    cn = np.empty((layers, batch, E))
    pre = np.empty((layers, batch, E))
    prod = np.empty((layers, batch, E))
    x_hat = np.empty((layers, batch, n))

    lam_edges = lam[:, graph.edge_var]
    prev_cn = np.zeros((batch, E))
    for l in range(layers):
        weighted = weights.vn_edge[l] * prev_cn
        totals = graph.sum_at_variables(weighted)
        pre[l] = weights.vn_channel[l][graph.edge_var] * lam_edges + totals[:, graph.edge_var] - weighted
        vn[l] = np.clip(np.tanh(0.5 * pre[l]), -1.0 + DELTA, 1.0 - DELTA)

        prod[l] = graph.scatter_checks(exclusive_products(graph.gather_checks(vn[l])))
        safe = np.clip(prod[l], -1.0 + DELTA, 1.0 - DELTA)
        cn[l] = np.clip(2.0 * np.arctanh(safe), -clip, clip)

        out = weights.out_channel[l] * lam + graph.sum_at_variables(weights.out_edge[l] * cn[l])
        x_hat[l] = expit(-out)
        prev_cn = cn[l]

    return DecodeTrace(vn_messages=vn, cn_messages=cn, x_hat=x_hat,
                       vn_preactivations=pre, cn_products=prod, llr=lam)


def hard_decision(x_hat_final) -> np.ndarray:
    """Bit is 1 iff x_hat > 0.5; an exact tie decides 0."""
    return (np.asarray(x_hat_final) > 0.5).astype(np.uint8)


def block_errors(graph: TannerGraph, weights: WeightSet, z, sigma: float, layers: int,
                 clip: float = DEFAULT_CLIP) -> np.ndarray:
    """
    Decode all-zero transmissions with noise z (shape (B, n)) and return the
    (B, n) bit-error matrix of the final layer.
    """
    z = _as_batch(z, graph.n_vars, 'Noise')
    trace = wbp_forward(graph, weights, llr(1.0 + z, sigma), layers, clip)
    return hard_decision(trace.final)


def error_indicator(graph: TannerGraph, weights: WeightSet, z, sigma: float, layers: int,
                    clip: float = DEFAULT_CLIP) -> int:
    """1 if the decoder fails to return the all-zero codeword for y = 1 + z."""
    bits = block_errors(graph, weights, np.asarray(z, dtype=np.float64).reshape(1, -1),
                        sigma, layers, clip)
    return int(bits.any())


def ml_decode(codewords, y) -> np.ndarray:
    """
    Brute-force ML decoding on BPSK-AWGN.

    Returns the codeword nearest to y in Euclidean distance; ties go to the
    lowest codeword index. y may be (n,) or (B, n).
    """
    codewords = np.asarray(codewords, dtype=np.uint8)
    if codewords.ndim != 2 or codewords.shape[0] == 0:
        raise ValueError("ml_decode needs a non-empty (K, n) codeword list")
    y = np.asarray(y, dtype=np.float64)
    single = y.ndim == 1
    y2 = _as_batch(y, codewords.shape[1], 'Received word')
    symbols = bpsk(codewords)
    distances = ((y2[:, None, :] - symbols[None, :, :]) ** 2).sum(axis=2)
    best = codewords[np.argmin(distances, axis=1)]
    return best[0] if single else best


class WBPDecoder:
    """
    A Tanner graph bound to one WeightSet.

    Weights are treated as frozen while decoding; several workers may share
    one instance.
    """

    def __init__(self, graph: TannerGraph, weights: Optional[WeightSet] = None,
                 layers: int = 5, clip: float = DEFAULT_CLIP):
        self.graph = graph
        self.layers = layers
        self.clip = clip
        self.weights = weights if weights is not None else WeightSet.ones(graph, layers)
        self.weights.check_compatible(graph, layers)

    @classmethod
    def for_code(cls, code: CodeSpec, weights: Optional[WeightSet] = None,
                 layers: Optional[int] = None, clip: float = DEFAULT_CLIP) -> 'WBPDecoder':
        if layers is None:
            layers = weights.layers if weights is not None else 5
        return cls(build_tanner(code.pcm), weights, layers, clip)

    def forward(self, lam) -> DecodeTrace:
        return wbp_forward(self.graph, self.weights, lam, self.layers, self.clip)

    def decode(self, lam) -> np.ndarray:
        return hard_decision(self.forward(lam).final)

    def bit_errors(self, z, sigma: float) -> np.ndarray:
        return block_errors(self.graph, self.weights, z, sigma, self.layers, self.clip)

    def error_indicator(self, z, sigma: float) -> int:
        return error_indicator(self.graph, self.weights, z, sigma, self.layers, self.clip)
