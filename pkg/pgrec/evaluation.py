"""
Sampled-negatives ranking protocol (each test positive ranked against 19
items the group never touched) plus HR@K, NDCG@K, MSE and MAPE.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .aggregation import MemberWeightRecord
from .data.sampling import sample_negatives
from .data.tsv import write_rows, write_tsv
from .data.types import Dataset, FeedbackKind, InteractionSet
from .errors import DataError, UsageError
from .predictors.base import Recommender

logger = logging.getLogger(__name__)

DEFAULT_K = (1, 5, 10)
N_NEGATIVES = 19
EVAL_REPORT_FILE = "eval_report.tsv"


@dataclass(frozen=True)
class RankedResult:
    group_id: int
    pos_item: int
    candidates: np.ndarray
    scores: np.ndarray
    rank_of_positive: int
    weights: Optional[MemberWeightRecord] = None


@dataclass
class EvalReport:
    hr_at: dict[int, float] = field(default_factory=dict)
    ndcg_at: dict[int, float] = field(default_factory=dict)
    mse: Optional[float] = None
    mape: Optional[float] = None
    n_test_cases: int = 0

    def as_row(self) -> dict[str, float]:
        row: dict[str, float] = {}
        for k in sorted(self.hr_at):
            row[f"hr@{k}"] = self.hr_at[k]
        for k in sorted(self.ndcg_at):
            row[f"ndcg@{k}"] = self.ndcg_at[k]
        if self.mse is not None:
            row["mse"] = self.mse
        if self.mape is not None:
            row["mape"] = self.mape
        row["n_test_cases"] = self.n_test_cases
        return row

    def write(self, path: str | os.PathLike) -> Path:
        return write_rows(path, ["metric", "value"], self.as_row().items())

    @classmethod
    def read(cls, path: str | os.PathLike) -> "EvalReport":
        frame = pd.read_csv(path, sep="\t")
        report = cls()
        for metric, value in zip(frame["metric"], frame["value"]):
            name, _, k = str(metric).partition("@")
            if name == "hr":
                report.hr_at[int(k)] = float(value)
            elif name == "ndcg":
                report.ndcg_at[int(k)] = float(value)
            elif name in ("mse", "mape"):
                setattr(report, name, float(value))
            elif name == "n_test_cases":
                report.n_test_cases = int(value)
        return report

    def summary(self) -> str:
        lines = [f"test cases: {self.n_test_cases}"]
        for k in sorted(self.hr_at):
            lines.append(f"HR@{k:<3d} {self.hr_at[k]:.4f}   NDCG@{k:<3d} {self.ndcg_at[k]:.4f}")
        if self.mse is not None:
            lines.append(f"MSE     {self.mse:.4f}")
        if self.mape is not None:
            lines.append(f"MAPE    {self.mape:.4f}")
        return "\n".join(lines)


def rank_of_positive(scores: np.ndarray, candidates: np.ndarray, pos_index: int = 0) -> int:
    """1-based rank by descending score; equal scores rank the smaller item id first."""
    pos_score = scores[pos_index]
    pos_item = candidates[pos_index]
    above = np.sum(scores > pos_score)
    tied_before = np.sum((scores == pos_score) & (candidates < pos_item))
    return int(above + tied_before + 1)


def hit_ratio(rank: int, k: int) -> float:
    return 1.0 if rank <= k else 0.0


def ndcg(rank: int, k: int) -> float:
    return float(1.0 / np.log2(rank + 1)) if rank <= k else 0.0


def _excluding(full: InteractionSet, subset: InteractionSet, n_items: int) -> InteractionSet:
    full_keys = full.rows * n_items + full.cols
    sub_keys = subset.rows * n_items + subset.cols
    return full.take(~np.isin(full_keys, sub_keys))


def evaluate_ranking(
    model: Recommender,
    dataset: Dataset,
    test_set: Optional[InteractionSet] = None,
    k_list: Sequence[int] = DEFAULT_K,
    seed: int = 0,
    threads: int = 1,
    n_negatives: int = N_NEGATIVES,
    with_weights: bool = False,
) -> tuple[EvalReport, list[RankedResult]]:
    if dataset.feedback_kind is not FeedbackKind.IMPLICIT:
        raise UsageError("ranking evaluation needs implicit feedback")
    test_set = dataset.split.test_group_item if test_set is None else test_set
    k_list = sorted(set(int(k) for k in k_list))
    if not k_list or k_list[0] < 1:
        raise UsageError("k values must be >= 1")

    # Negatives avoid every item the group interacted with in any window.
    others = _excluding(dataset.group_item, test_set, dataset.n_items)
    samples = sample_negatives(
        test_set, n_negatives, seed, dataset.n_items, exclude=others, keyed=True
    )
    weights_wanted = with_weights and model.supports_weights

    def run_case(sample) -> RankedResult:
        candidates = np.concatenate([[sample.pos_item], sample.neg_items]).astype(np.int64)
        scores = np.asarray(model.score_group(sample.row, candidates), dtype=np.float64)
        weights = model.member_weights(sample.row, sample.pos_item) if weights_wanted else None
        return RankedResult(
            sample.row,
            sample.pos_item,
            candidates,
            scores,
            rank_of_positive(scores, candidates),
            weights,
        )

    if threads > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_case, samples))
    else:
        results = [run_case(s) for s in samples]

    report = EvalReport(n_test_cases=len(results))
    ranks = np.array([r.rank_of_positive for r in results], dtype=np.int64)
    for k in k_list:
        if len(ranks):
            report.hr_at[k] = float(np.mean(ranks <= k))
            report.ndcg_at[k] = float(np.mean([ndcg(int(r), k) for r in ranks]))
        else:
            report.hr_at[k] = report.ndcg_at[k] = float("nan")
    logger.debug("ranked %d test cases", len(results))
    return report, results


def evaluate_regression(
    model: Recommender, dataset: Dataset, test_set: Optional[InteractionSet] = None
) -> EvalReport:
    test_set = dataset.split.test_group_item if test_set is None else test_set
    y = test_set.values
    zero = np.flatnonzero(y == 0)
    if len(zero):
        listed = ", ".join(
            f"(group {int(test_set.rows[i])}, item {int(test_set.cols[i])})" for i in zero[:10]
        )
        raise DataError(f"MAPE undefined for zero ratings: {listed}")
    if len(y) == 0:
        return EvalReport(mse=float("nan"), mape=float("nan"))
    y_hat = np.asarray(model.score_pairs(test_set.rows, test_set.cols), dtype=np.float64)
    diff = y - y_hat
    return EvalReport(
        mse=float(np.mean(diff * diff)),
        mape=float(np.mean(np.abs(diff) / y)),
        n_test_cases=len(y),
    )


def evaluate(
    model: Recommender,
    dataset: Dataset,
    test_set: Optional[InteractionSet] = None,
    k_list: Sequence[int] = DEFAULT_K,
    seed: int = 0,
    threads: int = 1,
    with_weights: bool = False,
) -> tuple[EvalReport, list[RankedResult]]:
    """Ranking metrics for implicit data, regression metrics for explicit data."""
    if dataset.feedback_kind is FeedbackKind.IMPLICIT:
        return evaluate_ranking(
            model, dataset, test_set, k_list, seed, threads, with_weights=with_weights
        )
    return evaluate_regression(model, dataset, test_set), []


def rank_all_items(model: Recommender, group_id: int) -> np.ndarray:
    items = np.arange(model.dataset.n_items, dtype=np.int64)
    scores = np.asarray(model.score_group(group_id, items), dtype=np.float64)
    return items[np.lexsort((items, -scores))]


def write_rankings(results: Sequence[RankedResult], dataset: Dataset, path) -> Path:
    """RankedResult dump in original ids, candidates in ranked order."""
    groups = dataset.id_maps.groups
    items = dataset.id_maps.items
    rows = []
    for r in results:
        order = np.lexsort((r.candidates, -r.scores))
        rows.append(
            {
                "group_id": groups[r.group_id],
                "pos_item": items[r.pos_item],
                "rank_of_positive": r.rank_of_positive,
                "candidates": ",".join(str(items[c]) for c in r.candidates[order]),
                "scores": ",".join(repr(float(s)) for s in r.scores[order]),
            }
        )
    columns = ["group_id", "pos_item", "rank_of_positive", "candidates", "scores"]
    return write_tsv(pd.DataFrame(rows, columns=columns), path)
