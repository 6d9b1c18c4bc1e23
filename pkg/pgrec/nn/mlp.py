"""Dense feed-forward layers with hand-derived backward passes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteError
from .params import ParamStore


@dataclass
class MlpCache:
    activations: list  # input to each layer
    pre_activations: list  # z of each layer
    relu_output: bool
    single: bool


def n_layers(params: ParamStore, prefix: str = "mlp") -> int:
    count = 0
    while f"{prefix}.{count}.w" in params:
        count += 1
    if count == 0:
        raise KeyError(f"no layers under {prefix!r}")
    return count


def mlp_forward(
    params: ParamStore, x: np.ndarray, prefix: str = "mlp", relu_output: bool = False
):
    """Forward ``x`` of shape (3d,) or (batch, 3d).

    Returns (score, cache) for a single vector with one output unit, else
    (outputs of shape (batch,) or (batch, out), cache).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x.reshape(1, -1) if single else x
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{prefix}: non-finite input")
    layers = n_layers(params, prefix)
    activations, pre = [], []
    for layer in range(layers):
        w = params[f"{prefix}.{layer}.w"]
        if a.shape[1] != w.shape[0]:
            raise ValueError(f"{prefix}.{layer}: input width {a.shape[1]} != {w.shape[0]}")
        activations.append(a)
        z = a @ w + params[f"{prefix}.{layer}.b"]
        pre.append(z)
        last = layer == layers - 1
        a = np.maximum(z, 0.0) if (not last or relu_output) else z
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{prefix}: non-finite activation (diverged?)")
    cache = MlpCache(activations, pre, relu_output, single)
    if a.shape[1] == 1:
        out = a[:, 0]
        return (float(out[0]) if single else out), cache
    return (a[0] if single else a), cache


def mlp_backward(
    params: ParamStore, cache: MlpCache, upstream, prefix: str = "mlp"
) -> np.ndarray:
    """Accumulate parameter gradients into ``params.grads``; return d(loss)/d(input)."""
    batch = cache.activations[0].shape[0]
    out_width = cache.pre_activations[-1].shape[1]
    g = np.asarray(upstream, dtype=np.float64)
    if g.size != batch * out_width:
        raise ValueError(
            f"{prefix}: upstream gradient has {g.size} entries, expected {batch * out_width}"
        )
    g = g.reshape(batch, out_width)
    layers = len(cache.pre_activations)
    for layer in reversed(range(layers)):
        last = layer == layers - 1
        if not last or cache.relu_output:
            g = g * (cache.pre_activations[layer] > 0)
        name = f"{prefix}.{layer}"
        params.grads[f"{name}.w"] += cache.activations[layer].T @ g
        params.grads[f"{name}.b"] += g.sum(axis=0, keepdims=True)
        g = g @ params[f"{name}.w"].T
    return g[0] if cache.single else g
