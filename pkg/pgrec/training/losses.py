"""Per-sample losses and their gradients; callers reduce with the batch mean."""

from __future__ import annotations

import numpy as np

BCE_CLAMP = 1e-12


def _out(x):
    x = np.asarray(x, dtype=np.float64)
    return float(x) if x.ndim == 0 else x


def pairwise_regression_loss(pos_score, neg_score):
    """(pos − neg − 1)², returned with d/dpos and d/dneg."""
    margin = np.asarray(pos_score, dtype=np.float64) - np.asarray(neg_score, dtype=np.float64) - 1.0
    grad = 2.0 * margin
    return _out(margin * margin), _out(grad), _out(-grad)


def mse_loss(y, y_hat):
    """(y − ŷ)² and its gradient with respect to ŷ."""
    diff = np.asarray(y, dtype=np.float64) - np.asarray(y_hat, dtype=np.float64)
    return _out(diff * diff), _out(-2.0 * diff)


def bce_loss(label, p):
    """Binary cross-entropy on a probability; the gradient is with respect to the logit."""
    label = np.asarray(label, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    clamped = np.clip(p, BCE_CLAMP, 1.0 - BCE_CLAMP)
    loss = -label * np.log(clamped) - (1.0 - label) * np.log(1.0 - clamped)
    return _out(loss), _out(p - label)
