from __future__ import annotations

import logging
from dataclasses import replace
from typing import Sequence

import pandas as pd

from ..data.types import Dataset
from ..errors import UsageError
from ..evaluation import DEFAULT_K, evaluate
from .config import TrainConfig
from .trainer import train

logger = logging.getLogger(__name__)


def sweep_beta(
    dataset: Dataset,
    betas: Sequence[float],
    config: TrainConfig = TrainConfig(),
    model_kind: str = "pgusa",
    k_list: Sequence[int] = DEFAULT_K,
    eval_seed: int = 0,
) -> pd.DataFrame:
    """Train and evaluate once per β with identical seeds; one row per β."""
    if not betas:
        raise UsageError("sweep needs at least one beta")
    rows = []
    for beta in betas:
        model, log = train(dataset, model_kind, replace(config, beta=float(beta)))
        report, _ = evaluate(
            model, dataset, k_list=k_list, seed=eval_seed, threads=config.threads
        )
        logger.info("beta %g: %s", beta, report.as_row())
        rows.append({"beta": float(beta), "epochs_run": log.epochs_run, **report.as_row()})
    return pd.DataFrame(rows)
