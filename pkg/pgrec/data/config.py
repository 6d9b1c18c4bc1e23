from __future__ import annotations

from dataclasses import dataclass

from .types import FeedbackKind, GroupRatingMode


@dataclass(frozen=True)
class DatasetConfig:
    feedback_kind: FeedbackKind = FeedbackKind.IMPLICIT
    test_fraction: float = 0.2
    validation_fraction: float = 0.1
    min_buyers: int = 2
    group_rating_mode: GroupRatingMode = GroupRatingMode.RATERS
    split_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")
        if self.min_buyers < 1:
            raise ValueError("min_buyers must be >= 1")
