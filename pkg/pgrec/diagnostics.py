"""End-to-end gradient check of a full predictor on a hand-sized toy dataset."""

from __future__ import annotations

import numpy as np

from .data.loader import assemble_dataset
from .data.types import DataSplit, Dataset, InteractionSet
from .errors import UsageError
from .nn.gradcheck import GradCheckReport, grad_check
from .predictors import build_model

GRAD_CHECK_INIT_STD = 0.5


def toy_dataset() -> Dataset:
    """3 users, 2 items, 1 group holding every user."""
    train_ui = InteractionSet.from_entries([(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0)])
    train_gi = InteractionSet.from_entries([(0, 0, 1.0)])
    empty = InteractionSet.empty()
    split = DataSplit(train_ui, empty, train_gi, empty, empty)
    return assemble_dataset([10.0, 100.0], [(0, 1, 2)], split)


def check_predictor_gradients(
    model_kind: str = "pgusa",
    d: int = 2,
    seed: int = 0,
    tolerance: float = 1e-3,
    corrupt: bool = False,
) -> GradCheckReport:
    """Pairwise group loss plus squared user-branch loss through every parameter.

    ``corrupt`` scales the upstream gradient, a negative control that must fail.
    """
    dataset = toy_dataset()
    model = build_model(
        model_kind, dataset, d=d, seed=seed, linear_std=GRAD_CHECK_INIT_STD
    )
    if not (model.trains_group_pass and model.trains_user_pass):
        raise UsageError(f"grad-check needs a model with group and user passes, not {model_kind!r}")
    rng = np.random.default_rng(seed)
    user_targets = rng.normal(size=3)
    users = np.array([0, 1, 2])
    user_items = np.array([0, 1, 0])
    scale = 1.5 if corrupt else 1.0

    def closure(params) -> float:
        y, cache = model.group_forward(np.array([0, 0]), np.array([0, 1]))
        margin = y[0] - y[1] - 1.0
        model.group_backward(cache, scale * np.array([2.0 * margin, -2.0 * margin]))
        x, ucache = model.user_forward(users, user_items)
        diff = x - user_targets
        model.user_backward(ucache, scale * diff)
        return float(margin * margin + 0.5 * np.sum(diff * diff))

    return grad_check(closure, model.params, tolerance=tolerance)
