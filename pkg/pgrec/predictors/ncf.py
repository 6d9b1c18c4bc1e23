"""
Neural collaborative filtering baseline: a GMF path (u ⊙ i) and an MLP tower
over [u; i] with separate embedding tables, fused by one linear layer.
Groups are virtual users appended after the real users (row n + group id).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..aggregation import aggregate_scores_avg, aggregate_scores_exp
from ..data.types import Dataset
from ..errors import DanglingReferenceError
from ..nn.mlp import MlpCache, mlp_backward, mlp_forward
from ..nn.params import LINEAR_INIT_STD, MlpSpec, ParamStore, add_mlp, xavier_uniform
from .base import Recommender, sigmoid


def tower_spec(d: int) -> MlpSpec:
    return MlpSpec((2 * d, d, max(1, d // 2)), output_activation="relu")


def init_ncf_params(
    n_rows: int, m: int, d: int, seed: int, linear_std: float = LINEAR_INIT_STD
) -> ParamStore:
    rng = np.random.default_rng(seed)
    store = ParamStore()
    store.add("ncf.gmf_user", xavier_uniform(rng, n_rows, d))
    store.add("ncf.gmf_item", xavier_uniform(rng, m, d))
    store.add("ncf.mlp_user", xavier_uniform(rng, n_rows, d))
    store.add("ncf.mlp_item", xavier_uniform(rng, m, d))
    tower = tower_spec(d)
    add_mlp(store, tower, rng, "tower", linear_std)
    add_mlp(store, MlpSpec((d + tower.layer_sizes[-1], 1)), rng, "fusion", linear_std)
    return store


@dataclass
class NcfCache:
    rows: np.ndarray
    items: np.ndarray
    gu: np.ndarray
    gi: np.ndarray
    tower: MlpCache
    fusion: MlpCache


def forward_ncf(params: ParamStore, rows: np.ndarray, items: np.ndarray):
    """Pre-activation scores (logits for implicit feedback)."""
    rows = np.asarray(rows, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    gu = params["ncf.gmf_user"][rows]
    gi = params["ncf.gmf_item"][items]
    mu = params["ncf.mlp_user"][rows]
    mi = params["ncf.mlp_item"][items]
    top, tower_cache = mlp_forward(
        params, np.concatenate([mu, mi], axis=1), "tower", relu_output=True
    )
    top = top.reshape(len(rows), -1)
    z, fusion_cache = mlp_forward(params, np.concatenate([gu * gi, top], axis=1), "fusion")
    return z, NcfCache(rows, items, gu, gi, tower_cache, fusion_cache)


def backward_ncf(params: ParamStore, cache: NcfCache, dz: np.ndarray) -> None:
    dfused = mlp_backward(params, cache.fusion, dz, "fusion")
    d = cache.gu.shape[1]
    dgmf, dtop = dfused[:, :d], dfused[:, d:]
    dmlp_in = mlp_backward(params, cache.tower, dtop, "tower")
    np.add.at(params.grads["ncf.gmf_user"], cache.rows, dgmf * cache.gi)
    np.add.at(params.grads["ncf.gmf_item"], cache.items, dgmf * cache.gu)
    np.add.at(params.grads["ncf.mlp_user"], cache.rows, dmlp_in[:, :d])
    np.add.at(params.grads["ncf.mlp_item"], cache.items, dmlp_in[:, d:])


def predict_ncf(params_ncf: ParamStore, row_id: int, item_id: int, implicit: bool = True) -> float:
    """Score one virtual-user/item pair: sigmoid output for implicit feedback."""
    if not 0 <= row_id < params_ncf["ncf.gmf_user"].shape[0]:
        raise DanglingReferenceError("virtual user", row_id)
    if not 0 <= item_id < params_ncf["ncf.gmf_item"].shape[0]:
        raise DanglingReferenceError("item", item_id)
    z, _ = forward_ncf(params_ncf, [row_id], [item_id])
    return float(sigmoid(z[0])) if implicit else float(z[0])


class NcfRecommender(Recommender):
    """Groups scored as virtual users; trained on user-item and group-item rows."""

    kind = "ncf"
    trains_group_pass = True
    trains_user_pass = True

    def __init__(self, params: ParamStore, dataset: Dataset):
        super().__init__(params, dataset)
        self.output = "sigmoid" if self.implicit else "identity"

    def group_row(self, group_id):
        return self.dataset.n_users + np.asarray(group_id, dtype=np.int64)

    def score_group(self, group_id, items):
        self.check_group(group_id)
        items = np.asarray(items, dtype=np.int64)
        self.check_items(items)
        z, _ = forward_ncf(self.params, np.full(len(items), self.group_row(group_id)), items)
        return self.to_score(z)

    def score_pairs(self, groups, items):
        z, _ = forward_ncf(self.params, self.group_row(groups), items)
        return self.to_score(z)

    def group_forward(self, groups, items):
        return forward_ncf(self.params, self.group_row(groups), items)

    def group_backward(self, cache, dy):
        backward_ncf(self.params, cache, dy)

    def user_forward(self, users, items):
        return forward_ncf(self.params, users, items)

    def user_backward(self, cache, dy):
        backward_ncf(self.params, cache, dy)

    def meta(self):
        meta = super().meta()
        meta["d"] = int(self.params["ncf.gmf_user"].shape[1])
        return meta


class NcfMemberRecommender(NcfRecommender):
    """NCF trained on user-item pairs only; group scores aggregate member scores
    by plain mean (``ncf-avg``) or by frequency-weighted mean (``ncf-exp``)."""

    trains_group_pass = False

    def __init__(self, kind: str, params: ParamStore, dataset: Dataset):
        super().__init__(params, dataset)
        if kind not in ("ncf-avg", "ncf-exp"):
            raise ValueError(f"unknown member-aggregation kind {kind!r}")
        self.kind = kind

    def member_scores(self, group_id: int, items: np.ndarray) -> np.ndarray:
        """(members, items) matrix of member scores."""
        members = np.asarray(self.dataset.members(group_id), dtype=np.int64)
        rows = np.repeat(members, len(items))
        cols = np.tile(items, len(members))
        z, _ = forward_ncf(self.params, rows, cols)
        return self.to_score(z).reshape(len(members), len(items))

    def score_group(self, group_id, items):
        self.check_group(group_id)
        items = np.asarray(items, dtype=np.int64)
        self.check_items(items)
        scores = self.member_scores(group_id, items)
        if self.kind == "ncf-avg":
            return np.array([aggregate_scores_avg(column) for column in scores.T])
        freqs = self.dataset.freq[list(self.dataset.members(group_id))].tolist()
        return np.array(
            [aggregate_scores_exp(list(zip(column.tolist(), freqs))) for column in scores.T]
        )

    def score_pairs(self, groups, items):
        return Recommender.score_pairs(self, groups, items)

    def group_forward(self, groups, items):
        raise NotImplementedError(f"{self.kind} trains on user-item pairs only")
