"""
Synthetic group-purchase data with a planted price-dependent influence rule.

For items in the cheapest price decile, a group positive is sourced from one
of the group's heavy (frequent) buyers with probability rho, and otherwise
from an equal-chance draw between heavy and non-heavy members. The planted
probability ramps linearly to zero over the first ``plant_ramp_deciles``
deciles, so the priciest decile always uses the equal-chance draw.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..errors import InfeasibleConfigError
from .config import DatasetConfig
from .loader import (
    DATASET_CONF,
    GROUP_ITEM_FILE,
    GROUPS_FILE,
    ITEMS_FILE,
    USER_ITEM_FILE,
    RawTables,
    build_dataset,
)
from .tsv import write_tsv
from .types import Dataset, FeedbackKind, GroupRatingMode

logger = logging.getLogger(__name__)

TRUTH_FILE = "influence_truth.tsv"
N_TIERS = 10


@dataclass(frozen=True)
class SyntheticConfig:
    n_users: int = 500
    n_items: int = 300
    n_groups: int = 8
    group_size_min: int = 20
    group_size_max: int = 60
    heavy_fraction: float = 0.2
    base_rate: float = 4.0
    heavy_factor: float = 8.0
    price_log_mean: float = 3.0
    price_log_sigma: float = 1.0
    rho: float = 0.9
    plant_ramp_deciles: int = 5
    events_per_group: int = 150
    co_buyers: int = 1
    latent_dim: int = 4
    temperature: float = 0.5
    days: int = 365
    feedback_kind: FeedbackKind = FeedbackKind.IMPLICIT
    group_rating_mode: GroupRatingMode = GroupRatingMode.RATERS

    def check(self) -> None:
        if min(self.n_users, self.n_items, self.n_groups) < 1:
            raise InfeasibleConfigError("n_users, n_items and n_groups must be >= 1")
        if not 1 <= self.group_size_min <= self.group_size_max:
            raise InfeasibleConfigError("need 1 <= group_size_min <= group_size_max")
        if self.group_size_max > self.n_users:
            raise InfeasibleConfigError(
                f"group size {self.group_size_max} exceeds n_users={self.n_users}"
            )
        if self.n_items < N_TIERS:
            raise InfeasibleConfigError(f"need at least {N_TIERS} items for price deciles")
        if not 0.0 <= self.rho <= 1.0:
            raise InfeasibleConfigError("rho must lie in [0, 1]")
        if not 0.0 < self.heavy_fraction < 1.0:
            raise InfeasibleConfigError("heavy_fraction must lie in (0, 1)")
        if self.plant_ramp_deciles < 1:
            raise InfeasibleConfigError("plant_ramp_deciles must be >= 1")

    def planted_rate(self, tier: int) -> float:
        return self.rho * max(0.0, 1.0 - tier / self.plant_ramp_deciles)


@dataclass
class SyntheticTables:
    raw: RawTables
    truth: pd.DataFrame


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max())
    return z / z.sum()


def _rating(affinity: float) -> float:
    return float(np.clip(np.round(3.0 + 2.0 * np.tanh(affinity)), 1.0, 5.0))


class _BalancedDeck:
    """Equal-chance heavy/non-heavy draws, balanced in pairs per (group, tier)."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.decks: dict[tuple[int, int], list[bool]] = {}

    def draw(self, key: tuple[int, int]) -> bool:
        deck = self.decks.setdefault(key, [])
        if not deck:
            deck.extend(self.rng.permutation([True, False]).tolist())
        return deck.pop()


def generate_synthetic_tables(config: SyntheticConfig, seed: int) -> SyntheticTables:
    config.check()
    rng = np.random.default_rng(seed)
    n, m, s = config.n_users, config.n_items, config.n_groups

    prices = np.maximum(
        np.round(np.exp(rng.normal(config.price_log_mean, config.price_log_sigma, m)), 2),
        0.01,
    )
    price_rank = np.argsort(np.argsort(prices, kind="stable"), kind="stable")
    tiers = price_rank * N_TIERS // m
    tier_items = [np.flatnonzero(tiers == k) for k in range(N_TIERS)]

    user_vecs = rng.normal(size=(n, config.latent_dim))
    item_vecs = rng.normal(size=(m, config.latent_dim))

    sizes = rng.integers(config.group_size_min, config.group_size_max + 1, size=s)
    if sizes.sum() <= n:
        order = rng.permutation(n)
        bounds = np.r_[0, np.cumsum(sizes)]
        members = [np.sort(order[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    else:
        members = [np.sort(rng.choice(n, size=k, replace=False)) for k in sizes]

    heavy = np.zeros(n, dtype=bool)
    for group in members:
        n_heavy = max(1, int(round(config.heavy_fraction * len(group))))
        heavy[rng.choice(group, size=n_heavy, replace=False)] = True

    explicit = config.feedback_kind is FeedbackKind.EXPLICIT
    purchases: dict[tuple[int, int], tuple[float, int]] = {}

    def buy(user: int, item: int, day: int) -> None:
        if (user, item) not in purchases:
            value = _rating(float(user_vecs[user] @ item_vecs[item])) if explicit else 1.0
            purchases[(user, item)] = (value, day)

    for u in range(n):
        rate = config.base_rate * (config.heavy_factor if heavy[u] else 1.0)
        count = min(1 + int(rng.poisson(rate)), m - 1)
        p = _softmax(item_vecs @ user_vecs[u] / config.temperature)
        items = rng.choice(m, size=count, replace=False, p=p)
        days = rng.integers(0, config.days, size=count)
        for item, day in zip(items.tolist(), days.tolist()):
            buy(u, item, day)

    deck = _BalancedDeck(rng)
    group_rows, truth_rows = [], []
    for g, group in enumerate(members):
        heavy_members = group[heavy[group]]
        light_members = group[~heavy[group]]
        seen_items: set[int] = set()
        for _ in range(config.events_per_group):
            day = int(rng.integers(0, config.days))
            tier = int(rng.integers(0, N_TIERS))
            # Each group buys an item once; an exhausted tier yields no event.
            candidates = tier_items[tier][~np.isin(tier_items[tier], list(seen_items))]
            if len(candidates) == 0:
                continue
            if len(heavy_members) and rng.random() < config.planted_rate(tier):
                pick_heavy = True
            else:
                pick_heavy = deck.draw((g, tier))
            pool = heavy_members if pick_heavy else light_members
            if len(pool) == 0:
                pool = light_members if pick_heavy else heavy_members
            source = int(rng.choice(pool))

            p = _softmax(item_vecs[candidates] @ user_vecs[source] / config.temperature)
            item = int(rng.choice(candidates, p=p))
            seen_items.add(item)

            buy(source, item, day)
            others = group[group != source]
            if config.co_buyers and len(others):
                k = min(config.co_buyers, len(others))
                for other in rng.choice(others, size=k, replace=False).tolist():
                    buy(int(other), item, day)
            group_rows.append((g, item, day))
            truth_rows.append((g, item, float(prices[item]), source, bool(heavy[source])))

    ui_keys = sorted(purchases)
    user_item = pd.DataFrame(
        {
            "user_id": [u + 1 for u, _ in ui_keys],
            "item_id": [i + 1 for _, i in ui_keys],
            "value": [purchases[k][0] for k in ui_keys],
            "timestamp": [purchases[k][1] for k in ui_keys],
        }
    )

    group_values = []
    for g, item, _day in group_rows:
        if not explicit:
            group_values.append(1.0)
            continue
        ratings = [purchases[(u, item)][0] for u in members[g].tolist() if (u, item) in purchases]
        if config.group_rating_mode is GroupRatingMode.ALL:
            group_values.append(float(np.sum(ratings)) / len(members[g]))
        else:
            group_values.append(float(np.mean(ratings)))
    group_item = pd.DataFrame(
        {
            "group_id": [g + 1 for g, _, _ in group_rows],
            "item_id": [i + 1 for _, i, _ in group_rows],
            "value": group_values,
            "timestamp": [d for _, _, d in group_rows],
        }
    ).sort_values(["group_id", "item_id"], kind="stable", ignore_index=True)

    items = pd.DataFrame({"item_id": np.arange(1, m + 1), "price": prices})
    groups = pd.DataFrame(
        {
            "group_id": [g + 1 for g, grp in enumerate(members) for _ in grp],
            "user_id": [int(u) + 1 for grp in members for u in grp],
        }
    )
    truth = pd.DataFrame(
        truth_rows, columns=["group_id", "item_id", "price", "user_id", "is_frequent"]
    )
    truth["group_id"] += 1
    truth["item_id"] += 1
    truth["user_id"] += 1
    truth["set_label"] = np.where(truth["is_frequent"], "A", "B")
    truth = truth.sort_values(["group_id", "item_id"], kind="stable", ignore_index=True)

    logger.info(
        "generated n=%d m=%d s=%d with %d purchases, %d group positives (rho=%.2f)",
        n, m, s, len(user_item), len(group_item), config.rho,
    )
    return SyntheticTables(
        raw=RawTables(user_item=user_item, items=items, groups=groups, group_item=group_item),
        truth=truth,
    )


def generate_synthetic(
    config: SyntheticConfig, seed: int, dataset_config: Optional[DatasetConfig] = None
) -> Dataset:
    dataset_config = dataset_config or DatasetConfig(
        feedback_kind=config.feedback_kind,
        group_rating_mode=config.group_rating_mode,
        split_seed=seed,
    )
    return build_dataset(generate_synthetic_tables(config, seed).raw, dataset_config)


def write_synthetic(
    tables: SyntheticTables, out_dir: str | os.PathLike, config: SyntheticConfig
) -> Path:
    out = Path(out_dir)
    write_tsv(tables.raw.user_item, out / USER_ITEM_FILE)
    write_tsv(tables.raw.group_item, out / GROUP_ITEM_FILE)
    write_tsv(tables.raw.items, out / ITEMS_FILE)
    write_tsv(tables.raw.groups, out / GROUPS_FILE)
    write_tsv(tables.truth, out / TRUTH_FILE)
    (out / DATASET_CONF).write_text(
        f"feedback_kind = {config.feedback_kind.value}\n"
        f"group_rating_mode = {config.group_rating_mode.value}\n"
    )
    return out
