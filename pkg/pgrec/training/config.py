from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from ..data.types import FeedbackKind
from ..errors import UsageError

DEFAULT_LEARNING_RATES = {FeedbackKind.IMPLICIT: 1e-4, FeedbackKind.EXPLICIT: 1e-3}
NCF_FAMILY = ("ncf", "ncf-avg", "ncf-exp")


class LossKind(str, enum.Enum):
    PAIRWISE = "pairwise"
    MSE = "mse"
    BCE = "bce"


@dataclass(frozen=True)
class TrainConfig:
    d: int = 8
    batch_size: int = 256
    # None picks the feedback kind's default (1e-4 implicit, 1e-3 explicit).
    learning_rate: Optional[float] = None
    beta: float = 5.0
    epochs: int = 30
    patience: int = 5
    # Validation loss must drop by more than this to reset patience.
    min_delta: float = 1e-4
    seed: int = 0
    loss_kind: Optional[LossKind] = None
    negative_ratio: int = 1
    rmsprop_rho: float = 0.9
    epsilon: float = 1e-8
    hidden_sizes: Optional[tuple[int, ...]] = None
    threads: int = 1

    def __post_init__(self):
        for name in ("d", "batch_size", "negative_ratio", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0 or self.patience < 1:
            raise ValueError("epochs must be >= 0 and patience >= 1")
        if not self.min_delta >= 0:
            raise ValueError("min_delta must be >= 0")
        if self.learning_rate is not None and self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if not 0.0 <= self.rmsprop_rho < 1.0 or self.epsilon <= 0:
            raise ValueError("rmsprop_rho must lie in [0, 1) and epsilon be > 0")
        if self.hidden_sizes is not None and any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive")

    def resolve(self, feedback_kind: FeedbackKind, model_kind: str) -> "TrainConfig":
        """Fill the learning rate and loss for this data, rejecting incompatible losses."""
        loss = self.loss_kind or default_loss(feedback_kind, model_kind)
        check_loss(loss, feedback_kind, model_kind)
        lr = self.learning_rate
        if lr is None:
            lr = DEFAULT_LEARNING_RATES[feedback_kind]
        return replace(self, learning_rate=lr, loss_kind=loss)


def default_loss(feedback_kind: FeedbackKind, model_kind: str) -> LossKind:
    if feedback_kind is FeedbackKind.EXPLICIT:
        return LossKind.MSE
    return LossKind.BCE if model_kind in NCF_FAMILY else LossKind.PAIRWISE


def check_loss(loss: LossKind, feedback_kind: FeedbackKind, model_kind: str) -> None:
    if loss is LossKind.MSE and feedback_kind is not FeedbackKind.EXPLICIT:
        raise UsageError("mse loss needs explicit feedback")
    if loss in (LossKind.PAIRWISE, LossKind.BCE) and feedback_kind is not FeedbackKind.IMPLICIT:
        raise UsageError(f"{loss.value} loss needs implicit feedback")
    if loss is LossKind.BCE and model_kind not in NCF_FAMILY:
        raise UsageError(f"bce loss needs a sigmoid-output model, not {model_kind!r}")
