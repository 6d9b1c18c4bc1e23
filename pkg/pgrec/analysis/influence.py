"""
Who drives a group's purchase: frequent-buyer labels, the most influential
member behind each correctly top-ranked test item, and the price-tail
chi-square tests on those records. Records carry original ids.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..aggregation import MemberWeightRecord
from ..data.tsv import write_tsv
from ..data.types import Dataset, InteractionSet
from ..errors import DataError, InsufficientSamplesError, UsageError
from ..evaluation import evaluate_ranking
from ..predictors.base import Recommender
from .stats import CRITICAL_VALUE_5PCT, ChiSquareResult, chi_square_test

logger = logging.getLogger(__name__)

INFLUENCE_COLUMNS = ["group_id", "item_id", "price", "user_id", "is_frequent", "set_label"]
FREQUENT_FACTOR = 2.0


@dataclass(frozen=True)
class InfluenceRecord:
    group_id: int
    item_id: int
    price: float
    most_influential_user: int
    is_frequent_buyer: bool

    @property
    def set_label(self) -> str:
        return "A" if self.is_frequent_buyer else "B"


def label_frequent_buyers(dataset: Dataset) -> dict[int, dict[int, bool]]:
    """Per group, member → True when their training purchase count is more
    than twice the group's mean count."""
    counts = dataset.purchase_counts
    labels = {}
    for g, group in enumerate(dataset.groups):
        if not group.members:
            raise DataError(f"group {dataset.id_maps.groups[g]} has no members")
        member_counts = counts[list(group.members)]
        threshold = FREQUENT_FACTOR * member_counts.mean()
        labels[g] = {u: bool(c > threshold) for u, c in zip(group.members, member_counts)}
    return labels


def extract_influence(
    model: Recommender,
    dataset: Dataset,
    test_set: Optional[InteractionSet] = None,
    seed: int = 0,
    threads: int = 1,
) -> tuple[list[InfluenceRecord], list[MemberWeightRecord]]:
    """Run the ranking protocol and keep the positives ranked first.

    Returns the influence records and the member weights behind them.
    """
    if not model.supports_weights:
        raise UsageError(f"model kind {model.kind!r} exposes no member weights")
    frequent = label_frequent_buyers(dataset)
    _, results = evaluate_ranking(
        model, dataset, test_set, k_list=(1,), seed=seed, threads=threads, with_weights=True
    )
    users, items, groups = dataset.id_maps.users, dataset.id_maps.items, dataset.id_maps.groups
    records, weights = [], []
    for result in results:
        if result.rank_of_positive != 1:
            continue
        top = result.weights.most_influential()
        records.append(
            InfluenceRecord(
                groups[result.group_id],
                items[result.pos_item],
                float(dataset.prices[result.pos_item]),
                users[top],
                frequent[result.group_id][top],
            )
        )
        weights.append(result.weights)
    logger.info("%d of %d test positives ranked first", len(records), len(results))
    return records, weights


def records_to_frame(records: Sequence[InfluenceRecord]) -> pd.DataFrame:
    rows = [
        (r.group_id, r.item_id, r.price, r.most_influential_user, r.is_frequent_buyer, r.set_label)
        for r in records
    ]
    return pd.DataFrame(rows, columns=INFLUENCE_COLUMNS)


def records_from_frame(frame: pd.DataFrame) -> list[InfluenceRecord]:
    flags = frame["is_frequent"].astype(str).str.lower().isin(["true", "1"])
    return [
        InfluenceRecord(int(g), int(i), float(p), int(u), bool(f))
        for g, i, p, u, f in zip(
            frame["group_id"], frame["item_id"], frame["price"], frame["user_id"], flags
        )
    ]


def read_records(path: str | os.PathLike) -> list[InfluenceRecord]:
    return records_from_frame(pd.read_csv(path, sep="\t"))


def write_records(records: Sequence[InfluenceRecord], path: str | os.PathLike) -> Path:
    return write_tsv(records_to_frame(records), path)


def write_weights(
    weights: Sequence[MemberWeightRecord], dataset: Dataset, path: str | os.PathLike
) -> Path:
    users, items, groups = dataset.id_maps.users, dataset.id_maps.items, dataset.id_maps.groups
    rows = [
        (groups[w.group_id], items[w.item_id], users[u], weight)
        for w in weights
        for u, weight in w.weights
    ]
    frame = pd.DataFrame(rows, columns=["group_id", "item_id", "user_id", "weight"])
    return write_tsv(frame, path)


def _tail_test(tail: Sequence[InfluenceRecord], name: str, critical_value: float):
    if not tail:
        raise InsufficientSamplesError(f"no influence records in the {name} price tail")
    n_frequent = sum(r.is_frequent_buyer for r in tail)
    return chi_square_test((n_frequent, len(tail) - n_frequent), critical_value)


def price_bucket_tests(
    records: Sequence[InfluenceRecord],
    low_pct: float = 10,
    high_pct: float = 90,
    critical_value: float = CRITICAL_VALUE_5PCT,
) -> tuple[ChiSquareResult, ChiSquareResult]:
    """Chi-square on frequent vs non-frequent influencers at or below the
    ``low_pct`` price percentile and at or above ``high_pct``."""
    if not records:
        raise InsufficientSamplesError("no influence records to test")
    prices = np.array([r.price for r in records])
    low_cut, high_cut = np.percentile(prices, [low_pct, high_pct])
    low = [r for r in records if r.price <= low_cut]
    high = [r for r in records if r.price >= high_cut]
    return _tail_test(low, "low", critical_value), _tail_test(high, "high", critical_value)


def price_bucket_report(records: Sequence[InfluenceRecord], n_buckets: int = 10) -> pd.DataFrame:
    """Count and share of set A and set B items per price bucket (deciles by default)."""
    columns = ["bucket", "price_low", "price_high", "n_items", "n_a", "n_b", "ratio_a", "ratio_b"]
    frame = records_to_frame(records)
    if frame.empty:
        return pd.DataFrame(columns=columns)
    n_buckets = min(n_buckets, len(frame))
    ranks = frame["price"].rank(method="first")
    frame["bucket"] = pd.qcut(ranks, n_buckets, labels=False) + 1
    rows = []
    for bucket, part in frame.groupby("bucket", sort=True):
        n_a = int((part["set_label"] == "A").sum())
        n = len(part)
        low, high = part["price"].min(), part["price"].max()
        rows.append((int(bucket), low, high, n, n_a, n - n_a, n_a / n, (n - n_a) / n))
    return pd.DataFrame(rows, columns=columns)
