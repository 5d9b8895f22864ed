"""
Reverse-Mode Gradients of the Unrolled Decoder
Exact backward pass through the WBP network plus a central-difference oracle
"""
import logging
from typing import Callable, Tuple

import numpy as np

from decoding.engine import DELTA, DEFAULT_CLIP, wbp_forward
from decoding.tanner import TannerGraph, exclusive_products
from decoding.weights import GradientSet, WeightSet
from .loss import LOG_CLAMP, bce_multiloss, labels_for

logger = logging.getLogger('wbpdecode')


def _product_backward(table: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """
    Backward of the per-check exclusive products.

    ``table`` holds tanh messages (pad 1), ``grad_out`` the gradient with
    respect to each exclusive product (pad 0). The derivative of output k with
    respect to input j is the product over the check excluding both j and k.
    """
    grad_in = np.zeros_like(table)
    for j in range(table.shape[-1]):
        without_j = table.copy()
        without_j[..., j] = 1.0
        contrib = grad_out * exclusive_products(without_j)
        grad_in[..., j] = contrib.sum(axis=-1) - contrib[..., j]
    return grad_in


def backward(graph: TannerGraph, weights: WeightSet, lam, c, layers: int,
             clip: float = DEFAULT_CLIP) -> Tuple[float, GradientSet]:
    """
    Multiloss and its gradient with respect to every weight.

    The loss is the batch mean of the per-sample multiloss, so a batch of
    identical samples yields the single-sample gradient. Clamped quantities
    (tanh messages, the CN product, clipped CN messages, clamped x_hat)
    pass zero gradient; everything else is differentiated exactly.

    Args:
        graph: Tanner graph
        weights: Current weights
        lam: Channel LLRs, (n,) or (B, n)
        c: Transmitted codeword(s), (n,) or (B, n)
        layers: Number of unrolled iterations
        clip: CN message clip

    Returns:
        (loss, GradientSet)
    """
    trace = wbp_forward(graph, weights, lam, layers, clip)
    labels = labels_for(trace, c)
    loss = bce_multiloss(trace, labels)

    lam = trace.llr
    batch, n = lam.shape
    ev = graph.edge_var
    grads = GradientSet.zeros_like(weights)

    g_pre_next = None
    for l in reversed(range(layers)):
        x = trace.x_hat[l]
        inside = (x > LOG_CLAMP) & (x < 1.0 - LOG_CLAMP)
        g_out = np.where(inside, labels - x, 0.0) / (n * batch)
        cn = trace.cn_messages[l]

        grads.out_channel[l] = (g_out * lam).sum(axis=0)
        g_out_edges = g_out[:, ev]
        grads.out_edge[l] = (g_out_edges * cn).sum(axis=0)
        g_cn = g_out_edges * weights.out_edge[l]

        if g_pre_next is not None:
            # VN layer l+1 read cn[l] on every other edge of the same variable
            others = graph.sum_at_variables(g_pre_next)[:, ev] - g_pre_next
            g_cn = g_cn + weights.vn_edge[l + 1] * others
            grads.vn_edge[l + 1] = (cn * others).sum(axis=0)

        product = trace.cn_products[l]
        safe = np.clip(product, -1.0 + DELTA, 1.0 - DELTA)
        passes = (np.abs(product) < 1.0 - DELTA) & (np.abs(2.0 * np.arctanh(safe)) < clip)
        g_product = np.where(passes, g_cn * 2.0 / (1.0 - safe * safe), 0.0)

        t = trace.vn_messages[l]
        g_t = graph.scatter_checks(
            _product_backward(graph.gather_checks(t), graph.gather_checks(g_product, pad=0.0))
        )
        open_ = np.abs(np.tanh(0.5 * trace.vn_preactivations[l])) < 1.0 - DELTA
        g_pre = np.where(open_, g_t * 0.5 * (1.0 - t * t), 0.0)

        grads.vn_channel[l] = (graph.sum_at_variables(g_pre) * lam).sum(axis=0)
        g_pre_next = g_pre

    return loss, grads


def central_differences(fn: Callable[[np.ndarray], float], vector: np.ndarray,
                        step: float) -> np.ndarray:
    """(fn(v + h e_i) - fn(v - h e_i)) / 2h for every coordinate i."""
    if step <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {step}")
    vector = np.asarray(vector, dtype=np.float64)
    grad = np.empty_like(vector)
    for i in range(vector.size):
        up = vector.copy()
        down = vector.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (fn(up) - fn(down)) / (2.0 * step)
    return grad


def finite_diff_grad(graph: TannerGraph, weights: WeightSet, lam, c, layers: int,
                     clip: float = DEFAULT_CLIP, step: float = 1e-5) -> GradientSet:
    """Central-difference gradient of the multiloss, one weight at a time."""
    shape = weights.shape

    def loss_at(vector):
        trial = WeightSet.from_vector(vector, shape)
        return bce_multiloss(wbp_forward(graph, trial, lam, layers, clip), c)

    return GradientSet.from_vector(central_differences(loss_at, weights.to_vector(), step), shape)
