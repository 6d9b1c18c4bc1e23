"""Common interface every recommender exposes to training, evaluation and analysis."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Optional

import numpy as np

from ..aggregation import MemberWeightRecord
from ..data.types import Dataset, FeedbackKind
from ..errors import DanglingReferenceError, UsageError
from ..nn.params import ParamStore


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class Recommender(ABC):
    kind = ""
    supports_weights = False
    trains_group_pass = False
    trains_user_pass = False
    # "sigmoid" models emit logits in training and probabilities when scoring.
    output = "identity"

    def __init__(self, params: ParamStore, dataset: Dataset):
        self.params = params
        self.dataset = dataset

    @property
    def implicit(self) -> bool:
        return self.dataset.feedback_kind is FeedbackKind.IMPLICIT

    def check_group(self, group_id: int) -> None:
        if not 0 <= group_id < self.dataset.n_groups:
            raise DanglingReferenceError("group", group_id)

    def check_items(self, items: np.ndarray) -> None:
        if len(items) and (items.min() < 0 or items.max() >= self.dataset.n_items):
            bad = items[(items < 0) | (items >= self.dataset.n_items)]
            raise DanglingReferenceError("item", int(bad[0]))

    @abstractmethod
    def score_group(self, group_id: int, items: np.ndarray) -> np.ndarray:
        """Scores of ``items`` for one group (probabilities for sigmoid models)."""

    def score_pairs(self, groups: np.ndarray, items: np.ndarray) -> np.ndarray:
        out = np.empty(len(groups))
        for g in np.unique(groups):
            sel = groups == g
            out[sel] = self.score_group(int(g), items[sel])
        return out

    def member_weights(self, group_id: int, item_id: int) -> MemberWeightRecord:
        raise UsageError(f"model kind {self.kind!r} exposes no member weights")

    # Training hooks: raw outputs (identity or logits) and their backward passes.
    def group_forward(self, groups: np.ndarray, items: np.ndarray):
        raise NotImplementedError

    def group_backward(self, cache, dy: np.ndarray) -> None:
        raise NotImplementedError

    def user_forward(self, users: np.ndarray, items: np.ndarray):
        raise NotImplementedError

    def user_backward(self, cache, dy: np.ndarray) -> None:
        raise NotImplementedError

    def parameter_count(self) -> int:
        return self.params.n_parameters()

    def embedding_parameter_count(self) -> int:
        return int(
            sum(
                v.size
                for k, v in self.params.params.items()
                if k.endswith("_emb") or ".gmf_" in k or ".mlp_" in k
            )
        )

    def meta(self) -> dict[str, Any]:
        return {"kind": self.kind, "feedback_kind": self.dataset.feedback_kind.value}

    def to_score(self, raw: np.ndarray) -> np.ndarray:
        return sigmoid(raw) if self.output == "sigmoid" else raw


def member_record(
    dataset: Dataset,
    group_id: int,
    item_id: int,
    weights: np.ndarray,
    members: Optional[np.ndarray] = None,
) -> MemberWeightRecord:
    members = dataset.members(group_id) if members is None else members
    return MemberWeightRecord(
        group_id, item_id, tuple((int(u), float(w)) for u, w in zip(members, weights))
    )
