"""Train/validation/test splitting and group-interaction derivation."""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Optional, Sequence

import numpy as np

from .types import (
    DataSplit,
    FeedbackKind,
    GroupDef,
    GroupRatingMode,
    InteractionSet,
)

logger = logging.getLogger(__name__)


def timestamp_cutoff(interactions: InteractionSet, test_fraction: float) -> float:
    """Timestamp at or below which an entry is training data."""
    return float(np.quantile(interactions.timestamps, 1.0 - test_fraction))


def split_interactions(
    interactions: InteractionSet,
    test_fraction: float,
    seed: int,
    cutoff: Optional[float] = None,
) -> tuple[InteractionSet, InteractionSet]:
    """Split by timestamp cutoff when given, else randomly by fraction."""
    if len(interactions) == 0:
        return interactions, interactions
    if cutoff is not None and interactions.has_timestamps:
        test_mask = interactions.timestamps > cutoff
    else:
        rng = np.random.default_rng(seed)
        n_test = int(round(test_fraction * len(interactions)))
        test_mask = np.zeros(len(interactions), dtype=bool)
        test_mask[rng.permutation(len(interactions))[:n_test]] = True
    return interactions.take(~test_mask), interactions.take(test_mask)


def derive_from_members(
    user_item: InteractionSet,
    groups: Sequence[GroupDef],
    min_buyers: int,
    feedback_kind: FeedbackKind = FeedbackKind.IMPLICIT,
    rating_mode: GroupRatingMode = GroupRatingMode.RATERS,
) -> InteractionSet:
    """(group, item) pairs where at least ``min_buyers`` distinct members interacted.

    Implicit pairs get value 1. Explicit pairs get the mean rating over raters,
    or over all members with non-raters counting 0.
    """
    if min_buyers < 1:
        raise ValueError("min_buyers must be >= 1")
    by_user: dict[int, list[tuple[int, float]]] = defaultdict(list)
    for row, col, value in zip(
        user_item.rows.tolist(), user_item.cols.tolist(), user_item.values.tolist()
    ):
        by_user[row].append((col, value))

    rows, cols, values = [], [], []
    for group in groups:
        ratings: dict[int, list[float]] = defaultdict(list)
        for member in group.members:
            for item, value in by_user.get(member, ()):
                ratings[item].append(value)
        for item in sorted(ratings):
            raters = ratings[item]
            if len(raters) < min_buyers:
                continue
            if feedback_kind is FeedbackKind.IMPLICIT:
                value = 1.0
            elif rating_mode is GroupRatingMode.ALL:
                value = float(np.sum(raters)) / group.size
            else:
                value = float(np.mean(raters))
            rows.append(group.group_id)
            cols.append(item)
            values.append(value)
    return InteractionSet(np.array(rows, np.int64), np.array(cols, np.int64), values)


def build_split(
    user_item: InteractionSet,
    group_item: Optional[InteractionSet],
    groups: Sequence[GroupDef],
    *,
    feedback_kind: FeedbackKind,
    test_fraction: float,
    validation_fraction: float,
    min_buyers: int,
    rating_mode: GroupRatingMode,
    seed: int,
) -> tuple[DataSplit, InteractionSet]:
    """Return the split and the full group-item set.

    Uses a timestamp cutoff when every user-item row carries a timestamp,
    otherwise seeded random splits. Without a group file, group interactions
    are derived separately inside each window.
    """
    cutoff = None
    if user_item.has_timestamps:
        cutoff = timestamp_cutoff(user_item, test_fraction)
        logger.info("splitting by timestamp cutoff %s", cutoff)
    train_ui, test_ui = split_interactions(user_item, test_fraction, seed, cutoff)

    if group_item is None:
        train_gi = derive_from_members(
            train_ui, groups, min_buyers, feedback_kind, rating_mode
        )
        test_gi = derive_from_members(
            test_ui, groups, min_buyers, feedback_kind, rating_mode
        )
        # Pairs already known from training are not new test positives.
        known = train_gi.pairs()
        keep = np.array(
            [(r, c) not in known for r, c in zip(test_gi.rows, test_gi.cols)],
            dtype=bool,
        )
        test_gi = test_gi.take(keep) if len(test_gi) else test_gi
        full_gi = train_gi.concat(test_gi)
    else:
        group_cutoff = cutoff if group_item.has_timestamps else None
        train_gi, test_gi = split_interactions(
            group_item, test_fraction, seed + 1, group_cutoff
        )
        full_gi = group_item

    train_gi, valid_gi = split_interactions(train_gi, validation_fraction, seed + 2)
    split = DataSplit(
        train_user_item=train_ui,
        test_user_item=test_ui,
        train_group_item=train_gi,
        validation_group_item=valid_gi,
        test_group_item=test_gi,
    )
    return split, full_gi
