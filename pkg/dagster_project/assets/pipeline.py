"""
Dagster assets for the recommendation pipeline.
synthetic data -> trained model -> evaluation, influence and GMV analyses.
"""

import pandas as pd
from dagster import AssetExecutionContext, MetadataValue, Output, asset

from pgrec.analysis.gmv import curves_frame, gmv_curves
from pgrec.analysis.influence import (
    extract_influence,
    price_bucket_tests,
    read_records,
    write_records,
)
from pgrec.data.synthetic import TRUTH_FILE, generate_synthetic_tables, write_synthetic
from pgrec.data.tsv import write_tsv
from pgrec.errors import InsufficientSamplesError
from pgrec.evaluation import EVAL_REPORT_FILE, evaluate
from pgrec.predictors import load_model
from pgrec.training import TRAIN_LOG_FILE, train

from ..resources import PgrecWorkspace

CHECKPOINT_FILE = "model.json"


@asset(
    description="Synthetic users, items, groups and purchases with planted influence",
    compute_kind="numpy",
    group_name="data",
)
def synthetic_dataset(context: AssetExecutionContext, pgrec: PgrecWorkspace) -> Output:
    config = pgrec.synthetic_config()
    context.log.info(f"Generating synthetic data (seed {pgrec.seed}) into {pgrec.data_dir}")
    tables = generate_synthetic_tables(config, pgrec.seed)
    out = write_synthetic(tables, pgrec.data_dir, config)
    raw = tables.raw
    return Output(
        value=str(out),
        metadata={
            "n_users": config.n_users,
            "n_items": len(raw.items),
            "n_groups": int(raw.groups["group_id"].nunique()),
            "user_item_rows": len(raw.user_item),
            "group_item_rows": len(raw.group_item),
        },
    )


@asset(
    description="Model trained on the synthetic dataset, saved as a checkpoint",
    compute_kind="numpy",
    group_name="training",
)
def trained_model(
    context: AssetExecutionContext, pgrec: PgrecWorkspace, synthetic_dataset: str
) -> Output:
    dataset = pgrec.load_dataset()
    ckpt = pgrec.model_dir / CHECKPOINT_FILE
    context.log.info(f"Training {pgrec.model_kind} for up to {pgrec.epochs} epochs")
    model, log = train(dataset, pgrec.model_kind, pgrec.train_config(), checkpoint_path=ckpt)
    log.write(pgrec.model_dir / TRAIN_LOG_FILE)
    context.log.info(f"Stopped after {log.epochs_run} epochs, best epoch {log.best_epoch}")
    return Output(
        value=str(ckpt),
        metadata={
            "final_loss": float(log.final_loss),
            "epochs_run": log.epochs_run,
            "parameter_count": model.parameter_count(),
            "checkpoint": MetadataValue.path(str(ckpt)),
        },
    )


@asset(
    description="HR/NDCG (implicit) or MSE/MAPE (explicit) on the test window",
    compute_kind="numpy",
    group_name="analysis",
)
def evaluation_report(
    context: AssetExecutionContext, pgrec: PgrecWorkspace, trained_model: str
) -> Output:
    dataset = pgrec.load_dataset()
    model = load_model(trained_model, dataset)
    report, _ = evaluate(model, dataset, seed=pgrec.seed, threads=pgrec.threads)
    path = report.write(pgrec.model_dir / EVAL_REPORT_FILE)
    context.log.info(report.summary())
    return Output(value=str(path), metadata={k: float(v) for k, v in report.as_row().items()})


@asset(
    description="Most influential members of top-ranked test items and price-tail chi-square tests",
    compute_kind="scipy",
    group_name="analysis",
)
def influence_analysis(
    context: AssetExecutionContext, pgrec: PgrecWorkspace, trained_model: str
) -> Output:
    out = pgrec.analysis_dir
    metadata = {}
    sources = {"truth": read_records(pgrec.data_dir / TRUTH_FILE)}

    dataset = pgrec.load_dataset()
    model = load_model(trained_model, dataset)
    if model.supports_weights:
        sources["model"], _ = extract_influence(model, dataset, seed=pgrec.seed)
    else:
        context.log.info(f"{model.kind} exposes no member weights; analysing ground truth only")

    rows = []
    for name, records in sources.items():
        write_records(records, out / f"influence_{name}.tsv")
        metadata[f"{name}_records"] = len(records)
        try:
            low, high = price_bucket_tests(records)
        except InsufficientSamplesError as exc:
            context.log.warning(f"{name}: {exc}")
            continue
        for label, result in (("low_price", low), ("high_price", high)):
            context.log.info(result.summary(f"{name} {label}"))
            rows.append({"source": name, **result.as_row(label)})
            metadata[f"{name}_{label}_chi2"] = result.statistic
    path = write_tsv(pd.DataFrame(rows), out / "chi_square.tsv")
    return Output(value=str(path), metadata=metadata)


@asset(
    description="Cumulative GMV over recommendation ranks, per group and in total",
    compute_kind="pandas",
    group_name="analysis",
)
def gmv_report(context: AssetExecutionContext, pgrec: PgrecWorkspace, trained_model: str) -> Output:
    dataset = pgrec.load_dataset()
    model = load_model(trained_model, dataset)
    curves = gmv_curves(model, dataset, threads=pgrec.threads)
    frame = curves_frame(curves, dataset)
    path = write_tsv(frame, pgrec.analysis_dir / "gmv_curves.tsv")
    total = frame[frame["group_id"] == "all"]["cumulative_gmv"]
    final = float(total.iloc[-1]) if len(total) else 0.0
    context.log.info(f"Total test-window GMV reachable over all ranks: {final:,.2f}")
    return Output(value=str(path), metadata={"groups": len(curves), "total_gmv": final})
