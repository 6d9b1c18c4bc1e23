"""
Group scoring model: aggregated member embedding plus an independent group
embedding, pooled with the item embedding and scored by an MLP head.

    f = g + b_l,   e = [f, i, f ⊙ i],   ŷ = MLP(e)

The user branch scores user-item pairs through the same head with the user
embedding in place of f, so both branches update the same tensors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..aggregation import Aggregator, MemberWeightRecord
from ..data.types import Dataset
from ..errors import DanglingReferenceError
from ..nn.mlp import MlpCache, mlp_backward, mlp_forward, n_layers
from ..nn.params import ParamStore
from .base import Recommender, member_record


@dataclass(frozen=True, eq=False)
class GroupContext:
    """Padded member index matrix and fixed side features."""

    members: np.ndarray  # (s, L) user ids, 0-padded
    mask: np.ndarray  # (s, L) 1.0 for real members
    alpha: np.ndarray  # (m,)
    freq: np.ndarray  # (n,)

    @classmethod
    def from_groups(
        cls, groups: Sequence[Sequence[int]], alpha: np.ndarray, freq: np.ndarray
    ) -> "GroupContext":
        width = max(len(g) for g in groups)
        members = np.zeros((len(groups), width), dtype=np.int64)
        mask = np.zeros((len(groups), width), dtype=np.float64)
        for row, group in enumerate(groups):
            if len(group) == 0:
                raise ValueError(f"group {row} is empty")
            members[row, : len(group)] = group
            mask[row, : len(group)] = 1.0
        return cls(members, mask, np.asarray(alpha, np.float64), np.asarray(freq, np.float64))

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "GroupContext":
        return cls.from_groups([g.members for g in dataset.groups], dataset.alpha, dataset.freq)


@dataclass
class GroupCache:
    groups: np.ndarray
    items: np.ndarray
    members: np.ndarray
    mask: np.ndarray
    I: np.ndarray
    f: np.ndarray
    agg: object
    mlp: MlpCache


@dataclass
class UserCache:
    users: np.ndarray
    items: np.ndarray
    U: np.ndarray
    I: np.ndarray
    mlp: MlpCache


def _pool(f: np.ndarray, I: np.ndarray) -> np.ndarray:
    return np.concatenate([f, I, f * I], axis=1)


def _unpool(de: np.ndarray, f: np.ndarray, I: np.ndarray):
    d = f.shape[1]
    prod = de[:, 2 * d :]
    return de[:, :d] + prod * I, de[:, d : 2 * d] + prod * f


def forward_group(
    params: ParamStore,
    context: GroupContext,
    aggregator: Aggregator,
    groups: np.ndarray,
    items: np.ndarray,
):
    """Batched group scores. Returns (ŷ (B,), member weights (B, L), cache)."""
    groups = np.asarray(groups, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    members = context.members[groups]
    mask = context.mask[groups]
    U = params["user_emb"][members] * mask[:, :, None]
    I = params["item_emb"][items]
    g, weights, agg_cache = aggregator.forward(
        params, U, mask, I, context.alpha[items], context.freq[members] * mask
    )
    f = g + params["group_emb"][groups]
    y, mlp_cache = mlp_forward(params, _pool(f, I))
    return y, weights, GroupCache(groups, items, members, mask, I, f, agg_cache, mlp_cache)


def backward_group(
    params: ParamStore, aggregator: Aggregator, cache: GroupCache, dy: np.ndarray
) -> None:
    de = mlp_backward(params, cache.mlp, dy)
    df, dI = _unpool(de, cache.f, cache.I)
    np.add.at(params.grads["group_emb"], cache.groups, df)
    dU, dI_agg = aggregator.backward(params, cache.agg, df)
    real = cache.mask > 0
    np.add.at(params.grads["user_emb"], cache.members[real], dU[real])
    np.add.at(params.grads["item_emb"], cache.items, dI + dI_agg)


def forward_user(params: ParamStore, users: np.ndarray, items: np.ndarray):
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    U = params["user_emb"][users]
    I = params["item_emb"][items]
    y, mlp_cache = mlp_forward(params, _pool(U, I))
    return y, UserCache(users, items, U, I, mlp_cache)


def backward_user(params: ParamStore, cache: UserCache, dy: np.ndarray) -> None:
    de = mlp_backward(params, cache.mlp, dy)
    dU, dI = _unpool(de, cache.U, cache.I)
    np.add.at(params.grads["user_emb"], cache.users, dU)
    np.add.at(params.grads["item_emb"], cache.items, dI)


def predict_group(
    params: ParamStore,
    context: GroupContext,
    group_id: int,
    item_id: int,
    aggregator: Aggregator,
):
    """Single (group, item) score. Returns (ŷ, per-member weights, cache)."""
    if not 0 <= group_id < len(context.members):
        raise DanglingReferenceError("group", group_id)
    if not 0 <= item_id < len(context.alpha):
        raise DanglingReferenceError("item", item_id)
    y, weights, cache = forward_group(params, context, aggregator, [group_id], [item_id])
    size = int(context.mask[group_id].sum())
    return float(y[0]), weights[0, :size], cache


def predict_user(params: ParamStore, user_id: int, item_id: int):
    if not 0 <= user_id < params["user_emb"].shape[0]:
        raise DanglingReferenceError("user", user_id)
    if not 0 <= item_id < params["item_emb"].shape[0]:
        raise DanglingReferenceError("item", item_id)
    y, cache = forward_user(params, [user_id], [item_id])
    return float(y[0]), cache


MODEL_AGGREGATORS = {
    "pgusa": "pgusa",
    "agree": "vanilla",
    "average": "average",
    "pgusa+agree": "pgusa+vanilla",
}


class GroupRecommender(Recommender):
    supports_weights = True
    trains_group_pass = True
    trains_user_pass = True

    def __init__(self, kind: str, params: ParamStore, dataset: Dataset, aggregator: Aggregator):
        super().__init__(params, dataset)
        self.kind = kind
        self.aggregator = aggregator
        self.context = GroupContext.from_dataset(dataset)

    def score_group(self, group_id: int, items: np.ndarray) -> np.ndarray:
        self.check_group(group_id)
        items = np.asarray(items, dtype=np.int64)
        self.check_items(items)
        y, _, _ = forward_group(
            self.params, self.context, self.aggregator, np.full(len(items), group_id), items
        )
        return y

    def score_pairs(self, groups: np.ndarray, items: np.ndarray) -> np.ndarray:
        y, _, _ = forward_group(self.params, self.context, self.aggregator, groups, items)
        return y

    def member_weights(self, group_id: int, item_id: int) -> MemberWeightRecord:
        _, weights, _ = predict_group(self.params, self.context, group_id, item_id, self.aggregator)
        return member_record(self.dataset, group_id, item_id, weights)

    def group_forward(self, groups, items):
        y, _, cache = forward_group(self.params, self.context, self.aggregator, groups, items)
        return y, cache

    def group_backward(self, cache, dy):
        backward_group(self.params, self.aggregator, cache, dy)

    def user_forward(self, users, items):
        return forward_user(self.params, users, items)

    def user_backward(self, cache, dy):
        backward_user(self.params, cache, dy)

    def meta(self):
        meta = super().meta()
        meta.update(aggregator=self.aggregator.name, d=int(self.params["user_emb"].shape[1]))
        hidden = [int(self.params[f"mlp.{l}.w"].shape[1]) for l in range(n_layers(self.params) - 1)]
        meta["hidden_sizes"] = hidden
        beta = getattr(self.aggregator, "beta", None)
        if beta is None and hasattr(self.aggregator, "parts"):
            beta = next((p.beta for p in self.aggregator.parts if hasattr(p, "beta")), None)
        if beta is not None:
            meta["beta"] = beta
        return meta
