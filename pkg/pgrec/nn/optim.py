from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError
from .params import ParamStore

RMSPROP_RHO = 0.9
RMSPROP_EPSILON = 1e-8


def rmsprop_step(
    params: ParamStore,
    learning_rate: float,
    rho: float = RMSPROP_RHO,
    epsilon: float = RMSPROP_EPSILON,
) -> None:
    """s ← ρ·s + (1−ρ)·g²;  θ ← θ − lr·g/(√s + ε); then zero the gradients.

    Updates are in place so aliased tensors stay shared.
    """
    updates = {}
    for name, grad in params.grads.items():
        sq = params.sq_avg[name]
        sq *= rho
        sq += (1.0 - rho) * grad * grad
        update = learning_rate * grad / (np.sqrt(sq) + epsilon)
        if not np.all(np.isfinite(update)):
            raise NonFiniteError(f"non-finite RMSprop update for {name}")
        updates[name] = update
    for name, update in updates.items():
        params.params[name] -= update
    params.zero_grad()
    params.step_count += 1
