"""
Gross merchandise value over recommendation ranks. Only items the group
truly bought in the test window accrue, each worth raw price times the
number of members who bought it there.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..data.types import Dataset
from ..evaluation import rank_all_items
from ..predictors.base import Recommender


@dataclass(frozen=True)
class GmvCurve:
    group_id: int
    cumulative_gmv: np.ndarray  # index r-1 holds the value at rank r

    def to_frame(self) -> pd.DataFrame:
        ranks = np.arange(1, len(self.cumulative_gmv) + 1)
        return pd.DataFrame({"rank": ranks, "cumulative_gmv": self.cumulative_gmv})


def window_buyers(dataset: Dataset, group_id: int) -> dict[int, int]:
    """Items the group truly interacted with in the test window → member buyers there."""
    members = np.asarray(dataset.members(group_id), dtype=np.int64)
    test_ui = dataset.split.test_user_item
    bought = test_ui.cols[np.isin(test_ui.rows, members)]
    counts = dict(zip(*np.unique(bought, return_counts=True)))
    true_items = dataset.split.test_group_item.cols_by_row().get(group_id, np.zeros(0, np.int64))
    return {int(i): int(counts.get(i, 0)) for i in true_items}


def gmv_from_ranking(
    ranking: Sequence[int], gains: dict[int, float], max_rank: Optional[int] = None
) -> np.ndarray:
    ranking = np.asarray(ranking, dtype=np.int64)
    if max_rank is not None:
        ranking = ranking[:max_rank]
    step = np.array([gains.get(int(i), 0.0) for i in ranking], dtype=np.float64)
    return np.cumsum(step)


def gmv_curve(
    model: Recommender, dataset: Dataset, group_id: int, max_rank: Optional[int] = None
) -> GmvCurve:
    gains = {
        item: float(dataset.prices[item]) * buyers
        for item, buyers in window_buyers(dataset, group_id).items()
    }
    return GmvCurve(group_id, gmv_from_ranking(rank_all_items(model, group_id), gains, max_rank))


def gmv_curves(
    model: Recommender,
    dataset: Dataset,
    groups: Optional[Sequence[int]] = None,
    max_rank: Optional[int] = None,
    threads: int = 1,
) -> list[GmvCurve]:
    groups = range(dataset.n_groups) if groups is None else groups
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda g: gmv_curve(model, dataset, int(g), max_rank), groups))


def gmv_total(curves: Sequence[GmvCurve]) -> np.ndarray:
    """Curves summed over groups; shorter curves hold their last value."""
    if not curves:
        return np.zeros(0)
    length = max(len(c.cumulative_gmv) for c in curves)
    total = np.zeros(length)
    for c in curves:
        values = c.cumulative_gmv
        if len(values) == 0:
            continue
        total += np.pad(values, (0, length - len(values)), mode="edge")
    return total


def curves_frame(curves: Sequence[GmvCurve], dataset: Dataset) -> pd.DataFrame:
    """Long format (group_id, rank, cumulative_gmv) with a final group_id "all" block."""
    parts = []
    for c in curves:
        frame = c.to_frame()
        frame.insert(0, "group_id", str(dataset.id_maps.groups[c.group_id]))
        parts.append(frame)
    total = gmv_total(curves)
    parts.append(
        pd.DataFrame(
            {"group_id": "all", "rank": np.arange(1, len(total) + 1), "cumulative_gmv": total}
        )
    )
    return pd.concat(parts, ignore_index=True)


def rank_profile(model: Recommender, dataset: Dataset, group_id: int) -> pd.DataFrame:
    """Truly bought test items in predicted-rank order with price and member-buyer count."""
    buyers = window_buyers(dataset, group_id)
    ranking = rank_all_items(model, group_id)
    rows = [
        (rank, dataset.id_maps.items[item], float(dataset.prices[item]), buyers[int(item)])
        for rank, item in enumerate(ranking, start=1)
        if int(item) in buyers
    ]
    return pd.DataFrame(rows, columns=["rank", "item_id", "price", "popularity"])
