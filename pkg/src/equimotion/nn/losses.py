"""Loss functions returning (scalar loss, gradient wrt logits/predictions)."""

import numpy as np


def softmax(logits, axis=-1):
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch.

    labels: int array (N,). Returns (loss, grad_logits, probs).
    """
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - z[np.arange(n), labels]))
    probs = softmax(logits.astype(np.float64))
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, (grad / n).astype(logits.dtype), probs


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def binary_ce_with_logits(logits, targets, weights=None):
    """Weighted binary cross-entropy; weights default to 1 and the loss is
    normalized by the weight sum. Returns (loss, grad_logits)."""
    x = logits.astype(np.float64)
    t = targets.astype(np.float64)
    if weights is None:
        weights = np.ones_like(x)
    denom = max(float(weights.sum()), 1e-12)
    per = np.maximum(x, 0) - x * t + np.log1p(np.exp(-np.abs(x)))
    loss = float((per * weights).sum() / denom)
    grad = (sigmoid(x) - t) * weights / denom
    return loss, grad.astype(logits.dtype)


def smooth_l1(pred, target, beta=1.0, normalizer=1.0):
    """Huber-style box regression loss summed over elements / normalizer."""
    d = pred.astype(np.float64) - target.astype(np.float64)
    ad = np.abs(d)
    quad = ad < beta
    per = np.where(quad, 0.5 * d * d / beta, ad - 0.5 * beta)
    loss = float(per.sum() / normalizer)
    grad = np.where(quad, d / beta, np.sign(d)) / normalizer
    return loss, grad.astype(pred.dtype)
