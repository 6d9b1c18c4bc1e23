"""Core data types: catalog, users, groups, interaction matrices and splits."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Optional

import numpy as np


class FeedbackKind(str, enum.Enum):
    IMPLICIT = "implicit"
    EXPLICIT = "explicit"


class GroupRatingMode(str, enum.Enum):
    RATERS = "raters"
    ALL = "all"


@dataclass(frozen=True)
class CatalogItem:
    item_id: int
    raw_price: float
    alpha: float


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    purchase_count: int
    freq: float


@dataclass(frozen=True)
class GroupDef:
    group_id: int
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


class Interaction(NamedTuple):
    row: int
    col: int
    value: float
    timestamp: Optional[float]


@dataclass(frozen=True, eq=False)
class InteractionSet:
    """Sparse (row, col, value[, timestamp]) entries, sorted by row then col.

    Rows are users for X and groups for Y; cols are items.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(self.cols, dtype=np.int64).reshape(-1)
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("rows, cols and values must have equal length")
        order = np.lexsort((cols, rows))
        object.__setattr__(self, "rows", rows[order])
        object.__setattr__(self, "cols", cols[order])
        object.__setattr__(self, "values", values[order])
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
            if len(ts) != len(rows):
                raise ValueError("timestamps must match entries")
            object.__setattr__(self, "timestamps", ts[order])
        if len(rows) > 1:
            same = (np.diff(self.rows) == 0) & (np.diff(self.cols) == 0)
            if same.any():
                i = int(np.flatnonzero(same)[0])
                raise ValueError(
                    f"duplicate entry ({self.rows[i]}, {self.cols[i]})"
                )

    @classmethod
    def empty(cls) -> "InteractionSet":
        return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))

    @classmethod
    def from_entries(cls, entries) -> "InteractionSet":
        entries = list(entries)
        if not entries:
            return cls.empty()
        rows, cols, values = zip(*[(e[0], e[1], e[2]) for e in entries])
        stamps = [e[3] if len(e) > 3 else None for e in entries]
        ts = None if any(s is None for s in stamps) else stamps
        return cls(np.array(rows), np.array(cols), np.array(values), ts)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[Interaction]:
        ts = self.timestamps
        for i in range(len(self.rows)):
            yield Interaction(
                int(self.rows[i]),
                int(self.cols[i]),
                float(self.values[i]),
                None if ts is None else float(ts[i]),
            )

    @property
    def has_timestamps(self) -> bool:
        return self.timestamps is not None and len(self.timestamps) > 0

    def take(self, mask_or_index) -> "InteractionSet":
        ts = None if self.timestamps is None else self.timestamps[mask_or_index]
        return InteractionSet(
            self.rows[mask_or_index],
            self.cols[mask_or_index],
            self.values[mask_or_index],
            ts,
        )

    def concat(self, other: "InteractionSet") -> "InteractionSet":
        ts = None
        if self.timestamps is not None and other.timestamps is not None:
            ts = np.concatenate([self.timestamps, other.timestamps])
        return InteractionSet(
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.values, other.values]),
            ts,
        )

    def cols_by_row(self) -> dict[int, np.ndarray]:
        if len(self.rows) == 0:
            return {}
        starts = np.flatnonzero(np.r_[True, np.diff(self.rows) != 0])
        ends = np.r_[starts[1:], len(self.rows)]
        return {
            int(self.rows[a]): self.cols[a:b] for a, b in zip(starts, ends)
        }

    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def row_counts(self, n_rows: int) -> np.ndarray:
        return np.bincount(self.rows, minlength=n_rows)

    def col_counts(self, n_cols: int) -> np.ndarray:
        return np.bincount(self.cols, minlength=n_cols)

    def equals(self, other: "InteractionSet") -> bool:
        if len(self) != len(other):
            return False
        same = (
            np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.values, other.values)
        )
        if self.timestamps is None or other.timestamps is None:
            return same and self.timestamps is None and other.timestamps is None
        return same and np.array_equal(self.timestamps, other.timestamps)


@dataclass(frozen=True)
class IdMaps:
    """Dense index → original id, per entity kind."""

    users: tuple[int, ...]
    items: tuple[int, ...]
    groups: tuple[int, ...]

    def index(self, kind: str) -> dict[int, int]:
        return {orig: i for i, orig in enumerate(getattr(self, kind))}

    def digest(self) -> str:
        h = hashlib.sha256()
        for kind in ("users", "items", "groups"):
            h.update(kind.encode())
            h.update(np.asarray(getattr(self, kind), dtype=np.int64).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class DataSplit:
    train_user_item: InteractionSet
    test_user_item: InteractionSet
    train_group_item: InteractionSet
    validation_group_item: InteractionSet
    test_group_item: InteractionSet


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable after construction; safe for concurrent readers."""

    users: tuple[UserProfile, ...]
    items: tuple[CatalogItem, ...]
    groups: tuple[GroupDef, ...]
    user_item: InteractionSet
    group_item: InteractionSet
    feedback_kind: FeedbackKind
    split: DataSplit
    id_maps: IdMaps
    min_buyers: int = 2
    # None when the split was supplied rather than drawn.
    split_seed: Optional[int] = None

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @cached_property
    def alpha(self) -> np.ndarray:
        return np.array([item.alpha for item in self.items], dtype=np.float64)

    @cached_property
    def prices(self) -> np.ndarray:
        return np.array([item.raw_price for item in self.items], dtype=np.float64)

    @cached_property
    def freq(self) -> np.ndarray:
        return np.array([user.freq for user in self.users], dtype=np.float64)

    @cached_property
    def purchase_counts(self) -> np.ndarray:
        return np.array([u.purchase_count for u in self.users], dtype=np.int64)

    def members(self, group_id: int) -> tuple[int, ...]:
        return self.groups[group_id].members

    @cached_property
    def all_group_items(self) -> dict[int, np.ndarray]:
        """Every item each group interacted with, across all windows."""
        return self.group_item.cols_by_row()

    def digest(self) -> str:
        h = hashlib.sha256(self.id_maps.digest().encode())
        h.update(self.feedback_kind.value.encode())
        h.update(self.prices.tobytes())
        for group in self.groups:
            h.update(np.asarray(group.members, dtype=np.int64).tobytes())
        for inter in (
            self.split.train_user_item,
            self.split.test_user_item,
            self.split.train_group_item,
            self.split.validation_group_item,
            self.split.test_group_item,
        ):
            h.update(b"|")
            h.update(inter.rows.tobytes())
            h.update(inter.cols.tobytes())
            h.update(inter.values.tobytes())
        return h.hexdigest()
