"""Build recommenders by kind, and save/restore them with their model card."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Sequence

from ..aggregation import make_aggregator
from ..data.tsv import write_rows
from ..data.types import Dataset
from ..errors import CheckpointMismatchError, UsageError
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.params import LINEAR_INIT_STD, MlpSpec, ParamStore, init_params
from .base import Recommender
from .group import MODEL_AGGREGATORS, GroupRecommender
from .ncf import NcfMemberRecommender, NcfRecommender, init_ncf_params
from .popularity import PopularityRecommender, init_popularity_params

MODEL_KINDS = (
    "pgusa",
    "agree",
    "average",
    "pgusa+agree",
    "ncf",
    "ncf-avg",
    "ncf-exp",
    "popularity",
)
MODEL_CARD_FILE = "model_card.tsv"


def build_model(
    kind: str,
    dataset: Dataset,
    d: int = 8,
    beta: float = 5.0,
    hidden_sizes: Optional[Sequence[int]] = None,
    seed: int = 0,
    params: Optional[ParamStore] = None,
    linear_std: float = LINEAR_INIT_STD,
) -> Recommender:
    """Fresh model (seeded init) or one wrapping ``params``."""
    if kind in MODEL_AGGREGATORS:
        aggregator = make_aggregator(MODEL_AGGREGATORS[kind], beta)
        if params is None:
            spec = MlpSpec.scoring_head(d, tuple(hidden_sizes) if hidden_sizes else None)
            params = init_params(
                dataset.n_users,
                dataset.n_items,
                dataset.n_groups,
                d,
                spec,
                seed,
                attention=aggregator.uses_attention_params,
                linear_std=linear_std,
            )
        return GroupRecommender(kind, params, dataset, aggregator)
    if kind in ("ncf", "ncf-avg", "ncf-exp"):
        if params is None:
            params = init_ncf_params(
                dataset.n_users + dataset.n_groups, dataset.n_items, d, seed, linear_std
            )
        if kind == "ncf":
            return NcfRecommender(params, dataset)
        return NcfMemberRecommender(kind, params, dataset)
    if kind == "popularity":
        return PopularityRecommender(
            init_popularity_params(dataset) if params is None else params, dataset
        )
    raise UsageError(
        f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}"
    )


def save_model(
    model: Recommender, path: str | os.PathLike, extra_meta: Optional[dict] = None
) -> Path:
    meta = model.meta()
    meta.update(extra_meta or {})
    path = save_checkpoint(path, model.params, meta, model.dataset.id_maps.digest())
    write_model_card(model, path.parent / MODEL_CARD_FILE, meta)
    return path


def load_model(path: str | os.PathLike, dataset: Dataset) -> Recommender:
    params, meta = load_checkpoint(path, expected_id_map_hash=dataset.id_maps.digest())
    if meta.get("feedback_kind") != dataset.feedback_kind.value:
        raise CheckpointMismatchError(
            f"{path}: trained on {meta.get('feedback_kind')} feedback, data is "
            f"{dataset.feedback_kind.value}"
        )
    kind = meta["kind"]
    reference = build_model(
        kind,
        dataset,
        d=int(meta.get("d", 8)),
        beta=float(meta.get("beta", 5.0)),
        hidden_sizes=meta.get("hidden_sizes"),
    )
    if reference.params.shapes() != params.shapes():
        raise CheckpointMismatchError(
            f"{path}: parameter shapes do not match a {kind} model"
        )
    reference.params.assign(params)
    return reference


def write_model_card(model: Recommender, path: str | os.PathLike, meta: dict) -> Path:
    rows = [
        ("model_kind", model.kind),
        ("d", meta.get("d", "")),
        ("aggregator", meta.get("aggregator", "")),
        ("beta", meta.get("beta", "")),
        ("parameter_count", model.parameter_count()),
        ("embedding_parameter_count", model.embedding_parameter_count()),
        ("dataset_hash", model.dataset.digest()),
    ]
    return write_rows(path, ["field", "value"], rows)
