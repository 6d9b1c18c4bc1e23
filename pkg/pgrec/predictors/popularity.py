"""Popularity baseline: items ranked by training interaction count."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..data.types import Dataset, InteractionSet
from ..nn.params import ParamStore
from .base import Recommender


def popularity_counts(
    train_interactions: InteractionSet, n_items: int
) -> np.ndarray:
    return train_interactions.col_counts(n_items)


def popularity_rank(
    train_interactions: InteractionSet, candidate_items: Sequence[int]
) -> list[int]:
    """Candidates by count descending, ties by ascending item id; unseen items count 0."""
    candidates = np.asarray(candidate_items, dtype=np.int64)
    if len(candidates) == 0:
        return []
    size = int(max(candidates.max(), train_interactions.cols.max(initial=-1)) + 1)
    counts = popularity_counts(train_interactions, size)[candidates]
    order = np.lexsort((candidates, -counts))
    return candidates[order].tolist()


def training_interactions(dataset: Dataset) -> InteractionSet:
    """Every training interaction: member purchases plus group purchases."""
    return dataset.split.train_user_item.concat(dataset.split.train_group_item)


def init_popularity_params(dataset: Dataset) -> ParamStore:
    store = ParamStore()
    counts = popularity_counts(training_interactions(dataset), dataset.n_items)
    store.add("popularity", counts.astype(np.float64)[:, None])
    return store


class PopularityRecommender(Recommender):
    """Same ranking for every group; nothing to train."""

    kind = "popularity"

    def score_group(self, group_id, items):
        self.check_group(group_id)
        items = np.asarray(items, dtype=np.int64)
        self.check_items(items)
        return self.params["popularity"][items, 0].copy()

    def score_pairs(self, groups, items):
        return self.params["popularity"][np.asarray(items, dtype=np.int64), 0].copy()

    def parameter_count(self) -> int:
        return 0
