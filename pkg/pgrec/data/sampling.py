"""Negative sampling for training (1:1) and sampled-candidate evaluation (19 per positive)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..errors import InsufficientNegativesError
from .types import InteractionSet


@dataclass(frozen=True)
class NegativeSample:
    row: int
    pos_item: int
    neg_items: np.ndarray


def _draw(
    rng: np.random.Generator, n_items: int, excluded: np.ndarray, k: int
) -> np.ndarray:
    # Rejection sampling keeps first occurrences, which is uniform without
    # replacement; dense rows fall back to an explicit eligible list.
    if n_items - len(excluded) <= 4 * k:
        eligible = np.setdiff1d(np.arange(n_items), excluded, assume_unique=True)
        return rng.choice(eligible, size=k, replace=False)
    picked: list[int] = []
    seen = set(excluded.tolist())
    while len(picked) < k:
        for item in rng.integers(0, n_items, size=2 * k).tolist():
            if item not in seen:
                seen.add(item)
                picked.append(item)
                if len(picked) == k:
                    break
    return np.array(picked, dtype=np.int64)


def sample_negatives(
    positives: InteractionSet,
    k_per_positive: int,
    seed: int,
    n_items: int,
    exclude: Optional[InteractionSet] = None,
    keyed: bool = True,
) -> list[NegativeSample]:
    """Draw ``k_per_positive`` items the row never interacted with, per positive.

    With ``keyed`` each positive draws from its own stream seeded by
    ``(seed, row, item)``, so adding or removing cases never shifts the
    samples of others. Otherwise one sequential stream is used (faster).
    ``exclude`` adds interactions to avoid besides ``positives`` themselves.
    """
    interacted: Mapping[int, np.ndarray] = (
        positives.concat(exclude).cols_by_row()
        if exclude is not None and len(exclude)
        else positives.cols_by_row()
    )
    interacted = {row: np.unique(cols) for row, cols in interacted.items()}
    shared = None if keyed else np.random.default_rng(seed)

    out = []
    for row, item in zip(positives.rows.tolist(), positives.cols.tolist()):
        excluded = interacted[row]
        eligible = n_items - len(excluded)
        if eligible < k_per_positive:
            raise InsufficientNegativesError(row, eligible, k_per_positive)
        rng = np.random.default_rng([seed, row, item]) if keyed else shared
        out.append(NegativeSample(row, item, _draw(rng, n_items, excluded, k_per_positive)))
    return out
