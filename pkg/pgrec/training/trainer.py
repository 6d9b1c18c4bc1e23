"""
Epoch loop: a group-item pass then a user-item pass per epoch, RMSprop
updates on batch-mean losses, validation loss and HR@10 after every epoch,
early stopping on validation loss and restoration of the best parameters.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..data.sampling import sample_negatives
from ..data.tsv import write_tsv
from ..data.types import Dataset, InteractionSet
from ..errors import DivergenceError, InsufficientNegativesError, NonFiniteError
from ..evaluation import evaluate_ranking
from ..nn.optim import rmsprop_step
from ..predictors import build_model, save_model
from ..predictors.base import Recommender, sigmoid
from .config import LossKind, TrainConfig
from .losses import bce_loss, mse_loss, pairwise_regression_loss

logger = logging.getLogger(__name__)

TRAIN_LOG_FILE = "train_log.tsv"
VALIDATION_K = 10
GROUP_PASS, USER_PASS, VALIDATION = 0, 1, 2


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    group_loss: float
    user_loss: float
    val_loss: float
    val_hr10: float
    data_seconds: float
    group_seconds: float
    user_seconds: float
    epoch_seconds: float
    cumulative_seconds: float


@dataclass
class TrainLog:
    records: list[EpochRecord] = field(default_factory=list)
    initial_val_loss: float = float("nan")
    initial_val_hr10: float = float("nan")
    best_epoch: int = 0
    stopped_early: bool = False

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    @property
    def epochs_run(self) -> int:
        return len(self.records)

    @property
    def final_loss(self) -> float:
        return self.records[-1].train_loss if self.records else float("nan")

    def to_frame(self) -> pd.DataFrame:
        columns = list(EpochRecord.__dataclass_fields__)
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)

    def write(self, path: str | os.PathLike) -> Path:
        return write_tsv(self.to_frame(), path)


def _pass_seed(seed: int, epoch: int, which: int) -> int:
    return int(np.random.SeedSequence([seed, epoch, which]).generate_state(1)[0])


@dataclass
class _Batches:
    """One pass worth of (rows, items, targets) laid out for the loss in use."""

    rows: np.ndarray
    pos_items: np.ndarray
    neg_items: Optional[np.ndarray]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.rows)

    def slice(self, index: np.ndarray) -> "_Batches":
        return _Batches(
            self.rows[index],
            self.pos_items[index],
            None if self.neg_items is None else self.neg_items[index],
            self.values[index],
        )


def _prepare(
    positives: InteractionSet,
    n_items: int,
    config: TrainConfig,
    seed: int,
    shuffle_rng: Optional[np.random.Generator],
) -> _Batches:
    if config.loss_kind is LossKind.MSE:
        batches = _Batches(positives.rows, positives.cols, None, positives.values)
    else:
        samples = sample_negatives(
            positives, config.negative_ratio, seed, n_items, keyed=shuffle_rng is None
        )
        k = config.negative_ratio
        rows = np.repeat([s.row for s in samples], k).astype(np.int64)
        pos = np.repeat([s.pos_item for s in samples], k).astype(np.int64)
        neg = np.concatenate([s.neg_items for s in samples]).astype(np.int64) if samples else pos
        batches = _Batches(rows, pos, neg, np.ones(len(rows)))
    if shuffle_rng is not None:
        batches = batches.slice(shuffle_rng.permutation(len(batches)))
    return batches


def _step_loss(forward, backward, batch: _Batches, loss_kind: LossKind) -> float:
    """Forward, loss and backward for one batch; returns the batch-mean loss."""
    n = len(batch)
    if loss_kind is LossKind.MSE:
        y_hat, cache = forward(batch.rows, batch.pos_items)
        loss, grad = mse_loss(batch.values, y_hat)
        backward(cache, np.atleast_1d(grad) / n)
        return float(np.mean(loss))
    rows = np.concatenate([batch.rows, batch.rows])
    items = np.concatenate([batch.pos_items, batch.neg_items])
    out, cache = forward(rows, items)
    if loss_kind is LossKind.PAIRWISE:
        loss, d_pos, d_neg = pairwise_regression_loss(out[:n], out[n:])
        dy = np.concatenate([np.atleast_1d(d_pos), np.atleast_1d(d_neg)]) / n
        backward(cache, dy)
        return float(np.mean(loss))
    labels = np.concatenate([np.ones(n), np.zeros(n)])
    loss, dz = bce_loss(labels, sigmoid(out))
    backward(cache, np.atleast_1d(dz) / (2 * n))
    return float(np.mean(loss))


def _run_pass(
    model: Recommender,
    batches: _Batches,
    config: TrainConfig,
    epoch: int,
    group: bool,
) -> float:
    forward = model.group_forward if group else model.user_forward
    backward = model.group_backward if group else model.user_backward
    total, count = 0.0, 0
    for b, start in enumerate(range(0, len(batches), config.batch_size)):
        batch = batches.slice(np.arange(start, min(start + config.batch_size, len(batches))))
        try:
            loss = _step_loss(forward, backward, batch, config.loss_kind)
            if not math.isfinite(loss):
                raise DivergenceError(epoch, b, loss)
            rmsprop_step(model.params, config.learning_rate, config.rmsprop_rho, config.epsilon)
        except NonFiniteError as exc:
            raise DivergenceError(epoch, b, float("nan")) from exc
        logger.debug("epoch %d %s batch %d loss %.6f", epoch, "group" if group else "user", b, loss)
        total += loss * len(batch)
        count += len(batch)
    return total / count if count else float("nan")


def validation_loss(model: Recommender, batches: _Batches, loss_kind: LossKind) -> float:
    """Mean loss on held-out pairs, computed through the scoring path."""
    if len(batches) == 0:
        return float("nan")
    groups = batches.rows
    if loss_kind is LossKind.MSE:
        loss, _ = mse_loss(batches.values, model.score_pairs(groups, batches.pos_items))
        return float(np.mean(loss))
    pos = model.score_pairs(groups, batches.pos_items)
    neg = model.score_pairs(groups, batches.neg_items)
    if loss_kind is LossKind.PAIRWISE:
        loss, _, _ = pairwise_regression_loss(pos, neg)
        return float(np.mean(loss))
    loss, _ = bce_loss(np.concatenate([np.ones(len(pos)), np.zeros(len(neg))]), np.r_[pos, neg])
    return float(np.mean(loss))


class _Validator:
    def __init__(self, model: Recommender, config: TrainConfig):
        self.model = model
        self.config = config
        dataset = model.dataset
        self.held_out = dataset.split.validation_group_item
        self.batches = None
        if len(self.held_out):
            seed = _pass_seed(config.seed, 0, VALIDATION)
            self.batches = _prepare(self.held_out, dataset.n_items, config, seed, None)
        self.ranking = config.loss_kind is not LossKind.MSE and len(self.held_out) > 0

    def __call__(self) -> tuple[float, float]:
        if self.batches is None:
            return float("nan"), float("nan")
        loss = validation_loss(self.model, self.batches, self.config.loss_kind)
        hr = float("nan")
        if self.ranking:
            try:
                report, _ = evaluate_ranking(
                    self.model,
                    self.model.dataset,
                    self.held_out,
                    k_list=(VALIDATION_K,),
                    seed=self.config.seed,
                    threads=self.config.threads,
                )
                hr = report.hr_at[VALIDATION_K]
            except InsufficientNegativesError as exc:
                logger.warning("validation HR@%d disabled: %s", VALIDATION_K, exc)
                self.ranking = False
        return loss, hr


def train(
    dataset: Dataset,
    model_kind: str,
    config: TrainConfig = TrainConfig(),
    checkpoint_path: Optional[str | os.PathLike] = None,
) -> tuple[Recommender, TrainLog]:
    """Train ``model_kind`` on ``dataset``; returns the model holding the best
    parameters (by validation loss, or training loss without a validation set)
    and the per-epoch log. An epoch only counts as better when it improves on
    the best so far by more than ``config.min_delta``; if none does, the
    initial parameters are kept and ``best_epoch`` is 0. Deterministic for a
    fixed ``config.seed``."""
    config = config.resolve(dataset.feedback_kind, model_kind)
    model = build_model(
        model_kind,
        dataset,
        d=config.d,
        beta=config.beta,
        hidden_sizes=config.hidden_sizes,
        seed=config.seed,
    )
    log = TrainLog()
    if not (model.trains_group_pass or model.trains_user_pass):
        logger.info("%s has no trainable parameters; skipping training", model_kind)
        _save(model, checkpoint_path, config, log)
        return model, log

    validate = _Validator(model, config)
    log.initial_val_loss, log.initial_val_hr10 = validate()
    logger.info(
        "training %s: %d parameters, lr=%g, loss=%s, initial val loss %.4f",
        model_kind,
        model.parameter_count(),
        config.learning_rate,
        config.loss_kind.value,
        log.initial_val_loss,
    )

    shuffle_rng = np.random.default_rng(config.seed)
    # The untrained parameters are epoch 0's checkpoint when a validation set exists.
    best_metric = log.initial_val_loss if math.isfinite(log.initial_val_loss) else math.inf
    best_params, stale = model.params.copy(), 0
    started = time.perf_counter()
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        group_batches = user_batches = None
        if model.trains_group_pass:
            group_batches = _prepare(
                dataset.split.train_group_item,
                dataset.n_items,
                config,
                _pass_seed(config.seed, epoch, GROUP_PASS),
                shuffle_rng,
            )
        if model.trains_user_pass:
            user_batches = _prepare(
                dataset.split.train_user_item,
                dataset.n_items,
                config,
                _pass_seed(config.seed, epoch, USER_PASS),
                shuffle_rng,
            )
        t1 = time.perf_counter()
        group_loss = (
            _run_pass(model, group_batches, config, epoch, group=True)
            if group_batches is not None
            else float("nan")
        )
        t2 = time.perf_counter()
        user_loss = (
            _run_pass(model, user_batches, config, epoch, group=False)
            if user_batches is not None
            else float("nan")
        )
        t3 = time.perf_counter()
        val_loss, val_hr = validate()
        t4 = time.perf_counter()

        train_loss = float(np.nanmean([group_loss, user_loss]))
        record = EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            group_loss=group_loss,
            user_loss=user_loss,
            val_loss=val_loss,
            val_hr10=val_hr,
            data_seconds=t1 - t0,
            group_seconds=t2 - t1,
            user_seconds=t3 - t2,
            epoch_seconds=t4 - t0,
            cumulative_seconds=t4 - started,
        )
        log.append(record)
        logger.info(
            "epoch %d/%d train %.4f (group %.4f, user %.4f) val %.4f HR@%d %.4f %.2fs",
            epoch,
            config.epochs,
            train_loss,
            group_loss,
            user_loss,
            val_loss,
            VALIDATION_K,
            val_hr,
            record.epoch_seconds,
        )

        metric = val_loss if math.isfinite(val_loss) else train_loss
        if metric < best_metric - config.min_delta:
            best_metric, best_params, stale = metric, model.params.copy(), 0
            log.best_epoch = epoch
        else:
            stale += 1
            if stale >= config.patience:
                log.stopped_early = True
                logger.info("no improvement for %d epochs; stopping", stale)
                break

    model.params.assign(best_params)
    _save(model, checkpoint_path, config, log)
    return model, log


def _save(model: Recommender, path, config: TrainConfig, log: TrainLog) -> None:
    if path is None:
        return
    extra = {
        "seed": config.seed,
        "learning_rate": config.learning_rate,
        "loss_kind": config.loss_kind.value,
        "epochs_run": log.epochs_run,
        "best_epoch": log.best_epoch,
    }
    if config.hidden_sizes is not None:
        extra["hidden_sizes"] = list(config.hidden_sizes)
    if model.dataset.split_seed is not None:
        extra["split_seed"] = model.dataset.split_seed
    save_model(model, path, extra)
    logger.info("saved checkpoint %s", path)
