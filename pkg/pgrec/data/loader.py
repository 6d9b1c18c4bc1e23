"""
Dataset ingestion: read the TSV files, validate them with line-numbered
diagnostics, remap ids to dense indices, split, and normalize side features.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import DanglingReferenceError, DataFormatError, DuplicateInteractionError
from ..settings import read_config_file
from .config import DatasetConfig
from .normalize import normalize_frequency, normalize_price
from .splits import build_split, derive_from_members
from .tsv import LINE, parse_numeric, read_tsv, write_rows
from .types import (
    CatalogItem,
    DataSplit,
    Dataset,
    FeedbackKind,
    GroupDef,
    IdMaps,
    InteractionSet,
    UserProfile,
)

logger = logging.getLogger(__name__)

USER_ITEM_FILE = "user_item.tsv"
GROUP_ITEM_FILE = "group_item.tsv"
ITEMS_FILE = "items.tsv"
GROUPS_FILE = "groups.tsv"
ID_MAP_DIR = "id_maps"
DATASET_CONF = "dataset.conf"


@dataclass
class RawTables:
    """Validated tables keyed by original ids.

    user_item: user_id, item_id, value[, timestamp]
    group_item: group_id, item_id, value[, timestamp] (optional)
    items: item_id, price
    groups: group_id, user_id
    """

    user_item: pd.DataFrame
    items: pd.DataFrame
    groups: pd.DataFrame
    group_item: Optional[pd.DataFrame] = None


def _read_interactions(path, row_col: str, feedback_kind: FeedbackKind) -> pd.DataFrame:
    df = read_tsv(path, [row_col, "item_id", "value"], ["timestamp"])
    out = pd.DataFrame(
        {
            row_col: parse_numeric(df, row_col, path, integer=True),
            "item_id": parse_numeric(df, "item_id", path, integer=True),
            "value": parse_numeric(df, "value", path),
            LINE: df[LINE].to_numpy(),
        }
    )
    if "timestamp" in df.columns:
        out["timestamp"] = parse_numeric(df, "timestamp", path)

    values = out["value"].to_numpy()
    if feedback_kind is FeedbackKind.IMPLICIT:
        bad = values != 1.0
        reason = "implicit feedback values must be exactly 1"
    else:
        bad = values <= 0
        reason = "explicit feedback values must be > 0"
    if bad.any():
        line = int(out[LINE].iloc[int(np.flatnonzero(bad)[0])])
        raise DataFormatError(path, line, reason)

    dup = out.duplicated([row_col, "item_id"]).to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        raise DuplicateInteractionError(
            path,
            int(out[LINE].iloc[i]),
            f"duplicate ({row_col}, item_id) entry "
            f"({out[row_col].iloc[i]}, {out['item_id'].iloc[i]})",
        )
    return out


def _read_items(path) -> pd.DataFrame:
    df = read_tsv(path, ["item_id", "price"])
    out = pd.DataFrame(
        {
            "item_id": parse_numeric(df, "item_id", path, integer=True),
            "price": parse_numeric(df, "price", path),
            LINE: df[LINE].to_numpy(),
        }
    )
    if len(out) == 0:
        raise DataFormatError(path, None, "no items")
    bad = out["price"].to_numpy() <= 0
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataFormatError(
            path, int(out[LINE].iloc[i]), f"non-positive price {out['price'].iloc[i]}"
        )
    dup = out.duplicated(["item_id"]).to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        raise DataFormatError(
            path, int(out[LINE].iloc[i]), f"duplicate item_id {out['item_id'].iloc[i]}"
        )
    return out


def _read_groups(path) -> pd.DataFrame:
    df = read_tsv(path, ["group_id", "user_id"])
    out = pd.DataFrame(
        {
            "group_id": parse_numeric(df, "group_id", path, integer=True),
            "user_id": parse_numeric(df, "user_id", path, integer=True),
            LINE: df[LINE].to_numpy(),
        }
    )
    dup = out.duplicated(["group_id", "user_id"]).to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        raise DataFormatError(
            path,
            int(out[LINE].iloc[i]),
            f"user {out['user_id'].iloc[i]} listed twice in group {out['group_id'].iloc[i]}",
        )
    return out


def _check_references(values: np.ndarray, known: np.ndarray, kind: str, path) -> None:
    missing = ~np.isin(values, known)
    if missing.any():
        raise DanglingReferenceError(kind, int(values[np.flatnonzero(missing)[0]]), path)


def read_tables(
    interaction_paths: Sequence[str | os.PathLike],
    item_path: str | os.PathLike,
    group_path: str | os.PathLike,
    feedback_kind: FeedbackKind,
) -> RawTables:
    """Read and validate the input files. ``interaction_paths`` is
    ``[user_item]`` or ``[user_item, group_item]``."""
    if not 1 <= len(interaction_paths) <= 2:
        raise ValueError("interaction_paths takes a user-item path and an optional group-item path")
    items = _read_items(item_path)
    groups = _read_groups(group_path)
    user_item = _read_interactions(interaction_paths[0], "user_id", feedback_kind)
    _check_references(
        user_item["item_id"].to_numpy(), items["item_id"].to_numpy(), "item", interaction_paths[0]
    )

    group_item = None
    if len(interaction_paths) == 2:
        path = interaction_paths[1]
        group_item = _read_interactions(path, "group_id", feedback_kind)
        _check_references(
            group_item["group_id"].to_numpy(), groups["group_id"].to_numpy(), "group", path
        )
        _check_references(
            group_item["item_id"].to_numpy(), items["item_id"].to_numpy(), "item", path
        )
    return RawTables(user_item=user_item, items=items, groups=groups, group_item=group_item)


def _interaction_set(
    df: pd.DataFrame, row_col: str, row_index: dict, item_index: dict
) -> InteractionSet:
    rows = np.array([row_index[v] for v in df[row_col].tolist()], dtype=np.int64)
    cols = np.array([item_index[v] for v in df["item_id"].tolist()], dtype=np.int64)
    ts = df["timestamp"].to_numpy(dtype=np.float64) if "timestamp" in df.columns else None
    return InteractionSet(rows, cols, df["value"].to_numpy(dtype=np.float64), ts)


def build_dataset(tables: RawTables, config: DatasetConfig) -> Dataset:
    """Remap ids, split, and compute normalized side features from training data."""
    user_ids = np.union1d(
        tables.user_item["user_id"].to_numpy(), tables.groups["user_id"].to_numpy()
    )
    item_ids = np.sort(tables.items["item_id"].to_numpy())
    group_ids = np.unique(tables.groups["group_id"].to_numpy())
    id_maps = IdMaps(
        users=tuple(int(v) for v in user_ids),
        items=tuple(int(v) for v in item_ids),
        groups=tuple(int(v) for v in group_ids),
    )
    user_index, item_index, group_index = (
        id_maps.index("users"),
        id_maps.index("items"),
        id_maps.index("groups"),
    )

    members: dict[int, list[int]] = {g: [] for g in range(len(group_ids))}
    for g, u in zip(tables.groups["group_id"].tolist(), tables.groups["user_id"].tolist()):
        members[group_index[g]].append(user_index[u])
    groups = tuple(GroupDef(g, tuple(sorted(members[g]))) for g in range(len(group_ids)))

    user_item = _interaction_set(tables.user_item, "user_id", user_index, item_index)
    group_item = None
    if tables.group_item is not None:
        group_item = _interaction_set(tables.group_item, "group_id", group_index, item_index)

    split, full_group_item = build_split(
        user_item,
        group_item,
        groups,
        feedback_kind=config.feedback_kind,
        test_fraction=config.test_fraction,
        validation_fraction=config.validation_fraction,
        min_buyers=config.min_buyers,
        rating_mode=config.group_rating_mode,
        seed=config.split_seed,
    )

    prices_by_id = dict(zip(tables.items["item_id"].tolist(), tables.items["price"].tolist()))
    prices = np.array([prices_by_id[i] for i in id_maps.items], dtype=np.float64)
    alphas = normalize_price(prices)
    items = tuple(
        CatalogItem(i, float(prices[i]), float(alphas[i])) for i in range(len(prices))
    )

    counts = split.train_user_item.row_counts(len(user_ids))
    freqs = normalize_frequency(counts)
    users = tuple(
        UserProfile(u, int(counts[u]), float(freqs[u])) for u in range(len(user_ids))
    )

    dataset = Dataset(
        users=users,
        items=items,
        groups=groups,
        user_item=user_item,
        group_item=full_group_item,
        feedback_kind=config.feedback_kind,
        split=split,
        id_maps=id_maps,
        min_buyers=config.min_buyers,
        split_seed=config.split_seed,
    )
    logger.info(
        "dataset n=%d m=%d s=%d |X|=%d |Y|=%d (train %d / valid %d / test %d)",
        dataset.n_users,
        dataset.n_items,
        dataset.n_groups,
        len(user_item),
        len(full_group_item),
        len(split.train_group_item),
        len(split.validation_group_item),
        len(split.test_group_item),
    )
    return dataset


def write_id_maps(dataset: Dataset, out_dir: str | os.PathLike) -> Path:
    out = Path(out_dir) / ID_MAP_DIR
    for kind in ("users", "items", "groups"):
        originals = getattr(dataset.id_maps, kind)
        write_rows(
            out / f"{kind}.tsv",
            ["original_id", "dense_index"],
            [(orig, i) for i, orig in enumerate(originals)],
        )
    return out


def load_dataset(
    interaction_paths: Sequence[str | os.PathLike],
    item_path: str | os.PathLike,
    group_path: str | os.PathLike,
    config: DatasetConfig,
    id_map_dir: str | os.PathLike | None = None,
) -> Dataset:
    tables = read_tables(interaction_paths, item_path, group_path, config.feedback_kind)
    dataset = build_dataset(tables, config)
    if id_map_dir is not None:
        write_id_maps(dataset, id_map_dir)
    return dataset


def data_dir_paths(data_dir: str | os.PathLike) -> tuple[list[Path], Path, Path]:
    data_dir = Path(data_dir)
    interactions = [data_dir / USER_ITEM_FILE]
    if (data_dir / GROUP_ITEM_FILE).is_file():
        interactions.append(data_dir / GROUP_ITEM_FILE)
    return interactions, data_dir / ITEMS_FILE, data_dir / GROUPS_FILE


def load_data_dir(
    data_dir: str | os.PathLike,
    config: DatasetConfig,
    id_map_dir: str | os.PathLike | None = None,
) -> Dataset:
    interactions, items, groups = data_dir_paths(data_dir)
    return load_dataset(interactions, items, groups, config, id_map_dir)


def derive_group_interactions(
    dataset: Dataset, min_buyers: int, window: str = "train"
) -> InteractionSet:
    """Group-item pairs where at least ``min_buyers`` members bought the item.

    ``window`` picks the user-item window: "train" (default), "test" or "all".
    """
    source = {
        "train": dataset.split.train_user_item,
        "test": dataset.split.test_user_item,
        "all": dataset.user_item,
    }[window]
    return derive_from_members(source, dataset.groups, min_buyers, dataset.feedback_kind)


def read_dataset_conf(data_dir: str | os.PathLike) -> dict[str, str]:
    """``dataset.conf`` beside the data files, or an empty mapping."""
    path = Path(data_dir) / DATASET_CONF
    return read_config_file(path) if path.is_file() else {}


def validate_dataset(data_dir: str | os.PathLike, config: DatasetConfig) -> dict[str, int]:
    """Run every ingestion check and the split; returns summary counts."""
    dataset = load_data_dir(data_dir, config)
    return {
        "users": dataset.n_users,
        "items": dataset.n_items,
        "groups": dataset.n_groups,
        "user_item": len(dataset.user_item),
        "group_item": len(dataset.group_item),
        "train_group_item": len(dataset.split.train_group_item),
        "validation_group_item": len(dataset.split.validation_group_item),
        "test_group_item": len(dataset.split.test_group_item),
    }


def assemble_dataset(
    prices: Sequence[float],
    group_members: Sequence[Sequence[int]],
    split: DataSplit,
    feedback_kind: FeedbackKind = FeedbackKind.IMPLICIT,
    n_users: Optional[int] = None,
    min_buyers: int = 2,
) -> Dataset:
    """Build a Dataset from dense-indexed pieces and an explicit split.

    Original ids are dense index + 1. Used for hand-made toy data.
    """
    prices = np.asarray(prices, dtype=np.float64)
    if n_users is None:
        seen = [u for members in group_members for u in members]
        seen += split.train_user_item.rows.tolist() + split.test_user_item.rows.tolist()
        n_users = max(seen) + 1 if seen else 0
    alphas = normalize_price(prices)
    counts = split.train_user_item.row_counts(n_users)
    freqs = normalize_frequency(counts) if n_users else np.zeros(0)
    group_item = split.train_group_item.concat(split.validation_group_item).concat(
        split.test_group_item
    )
    return Dataset(
        users=tuple(UserProfile(u, int(counts[u]), float(freqs[u])) for u in range(n_users)),
        items=tuple(
            CatalogItem(i, float(p), float(a)) for i, (p, a) in enumerate(zip(prices, alphas))
        ),
        groups=tuple(GroupDef(g, tuple(sorted(m))) for g, m in enumerate(group_members)),
        user_item=split.train_user_item.concat(split.test_user_item),
        group_item=group_item,
        feedback_kind=feedback_kind,
        split=split,
        id_maps=IdMaps(
            users=tuple(range(1, n_users + 1)),
            items=tuple(range(1, len(prices) + 1)),
            groups=tuple(range(1, len(group_members) + 1)),
        ),
        min_buyers=min_buyers,
    )
