"""
pgrec command line: synthesize data, validate it, train, evaluate, sweep β,
and run the influence, GMV and significance analyses. Results go to files
under ``--out`` (plus a manifest); stdout carries machine-readable rows only.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from . import settings
from .analysis.gmv import curves_frame, gmv_curves, rank_profile
from .analysis.influence import (
    extract_influence,
    price_bucket_report,
    price_bucket_tests,
    read_records,
    write_records,
    write_weights,
)
from .analysis.stats import CRITICAL_VALUE_5PCT, T_TEST_ALPHA, t_test_two_sample
from .data.config import DatasetConfig
from .data.loader import load_data_dir, read_dataset_conf, validate_dataset, write_id_maps
from .data.synthetic import SyntheticConfig, generate_synthetic_tables, write_synthetic
from .data.tsv import write_rows, write_tsv
from .data.types import Dataset
from .diagnostics import check_predictor_gradients
from .errors import DataError, GradCheckFailed, InsufficientSamplesError, PgrecError, UsageError
from .evaluation import DEFAULT_K, EVAL_REPORT_FILE, EvalReport, evaluate, write_rankings
from .logs import configure_logging
from .manifest import build_manifest, write_manifest
from .nn.checkpoint import load_checkpoint
from .predictors import MODEL_KINDS, load_model
from .training import TRAIN_LOG_FILE, LossKind, TrainConfig, sweep_beta, train

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "model.json"
CONFIG_CLASSES = (TrainConfig, DatasetConfig, SyntheticConfig)
LOWER_IS_BETTER = ("mse", "mape")


class ArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors flow through the exit-code mapping."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", type=Path, default=None, help="key = value overrides")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", type=Path, default=None)

    data = ArgumentParser(add_help=False)
    data.add_argument("--data", type=Path, default=None)

    model_flags = ArgumentParser(add_help=False)
    model_flags.add_argument("--model", choices=MODEL_KINDS, default="pgusa")
    model_flags.add_argument("--loss", choices=[k.value for k in LossKind], default=None)
    model_flags.add_argument("--beta", type=float, default=None)
    model_flags.add_argument("--epochs", type=int, default=None)

    parser = ArgumentParser(prog="pgrec", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    sub.required = True

    p = sub.add_parser("synth", parents=[common], help="write a synthetic data directory")
    p.add_argument("--rho", type=float, default=None, help="planted cheap-item influence")

    sub.add_parser("validate", parents=[common, data], help="run the ingestion checks")

    sub.add_parser("train", parents=[common, data, model_flags], help="train a model")

    p = sub.add_parser("evaluate", parents=[common, data], help="evaluate a checkpoint")
    p.add_argument("--model", type=Path, required=True, help="checkpoint file or run dir")
    p.add_argument("--k", type=_int_list, default=list(DEFAULT_K))
    p.add_argument("--dump-rankings", action="store_true")
    p.add_argument("--dump-weights", action="store_true")

    p = sub.add_parser("sweep-beta", parents=[common, data, model_flags], help="β sweep")
    p.add_argument("--betas", type=_float_list, default=[1.0, 5.0, 10.0])
    p.add_argument("--k", type=_int_list, default=list(DEFAULT_K))

    p = sub.add_parser("analyze-influence", parents=[common, data], help="chi-square analysis")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", type=Path, help="checkpoint file or run dir")
    source.add_argument("--records", type=Path, help="influence record TSV")
    p.add_argument("--low-pct", type=float, default=10.0)
    p.add_argument("--high-pct", type=float, default=90.0)
    p.add_argument("--critical-value", type=float, default=CRITICAL_VALUE_5PCT)
    p.add_argument("--dump-weights", action="store_true")

    p = sub.add_parser("analyze-gmv", parents=[common, data], help="GMV over ranks")
    p.add_argument("--model", type=Path, required=True, help="checkpoint file or run dir")
    p.add_argument("--max-rank", type=int, default=None)
    p.add_argument("--group", type=int, default=None, help="original group id to profile")

    p = sub.add_parser("grad-check", parents=[common], help="finite-difference check")
    p.add_argument("--model", choices=MODEL_KINDS, default="pgusa")
    p.add_argument("--tolerance", type=float, default=1e-3)

    p = sub.add_parser("compare", parents=[common], help="Welch t-tests across run dirs")
    p.add_argument("runs", nargs="+", type=Path)
    p.add_argument("--metric", default="hr@10")
    p.add_argument("--alpha", type=float, default=T_TEST_ALPHA)
    return parser


# -- configuration -----------------------------------------------------------


def _config_layers(args) -> list[dict[str, Any]]:
    """Environment, then the --config file, then explicit flags."""
    file_layer = settings.read_config_file(args.config) if args.config else {}
    settings.check_known_keys(file_layer, *CONFIG_CLASSES)
    flags = {
        "seed": args.seed,
        "threads": args.threads,
        "beta": getattr(args, "beta", None),
        "epochs": getattr(args, "epochs", None),
        "loss_kind": getattr(args, "loss", None),
        "rho": getattr(args, "rho", None),
    }
    flags = {k: v for k, v in flags.items() if v is not None}
    return [settings.environment_layer(), file_layer, flags]


def _train_config(args) -> TrainConfig:
    return settings.build_config(TrainConfig, *_config_layers(args))


def _data_dir(args) -> Path:
    data = args.data or os.getenv("PGREC_DATA_DIR")
    if not data:
        raise UsageError("--data is required (or set PGREC_DATA_DIR)")
    data = Path(data)
    if not data.is_dir():
        raise UsageError(f"data directory not found: {data}")
    return data


def _dataset_config(args, data_dir: Path, checkpoint: Optional[Path] = None) -> DatasetConfig:
    """dataset.conf and the --config file win; otherwise the split follows the
    checkpoint's recorded split seed, or the run seed for fresh runs."""
    conf = read_dataset_conf(data_dir)
    settings.check_known_keys(conf, *CONFIG_CLASSES)
    env, file_layer, flags = _config_layers(args)
    split_seed = settings.build_config(TrainConfig, env, file_layer, flags).seed
    if checkpoint is not None:
        split_seed = load_checkpoint(checkpoint)[1].get("split_seed", split_seed)
    return settings.build_config(DatasetConfig, {"split_seed": split_seed}, conf, file_layer)


def _load(args, checkpoint: Optional[Path] = None) -> Dataset:
    data_dir = _data_dir(args)
    return load_data_dir(data_dir, _dataset_config(args, data_dir, checkpoint))


def _out_dir(args, default: Optional[Path] = None) -> Path:
    out = args.out or default
    if out is None:
        base = os.getenv("PGREC_OUT_DIR", "runs")
        out = Path(base) / args.command
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _checkpoint_path(path: Path) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_FILE
    if not path.is_file():
        raise UsageError(f"checkpoint not found: {path}")
    return path


def _emit(rows: Sequence[Sequence[Any]]) -> None:
    for row in rows:
        print("\t".join(str(v) for v in row))


def _emit_frame(frame: pd.DataFrame) -> None:
    sys.stdout.write(frame.to_csv(sep="\t", index=False, lineterminator="\n"))


# -- commands ----------------------------------------------------------------


def cmd_synth(args, argv) -> None:
    layers = _config_layers(args)
    config = settings.build_config(SyntheticConfig, *layers)
    seed = settings.build_config(TrainConfig, *layers).seed
    tables = generate_synthetic_tables(config, seed)
    out = write_synthetic(tables, _out_dir(args), config)
    write_manifest(out, build_manifest("synth", argv, seed, extra={"synthetic": vars_of(config)}))
    raw = tables.raw
    _emit(
        [
            ("users", raw.user_item["user_id"].nunique()),
            ("items", len(raw.items)),
            ("groups", raw.groups["group_id"].nunique()),
            ("user_item", len(raw.user_item)),
            ("group_item", len(raw.group_item)),
            ("truth_records", len(tables.truth)),
        ]
    )


def vars_of(config) -> dict[str, Any]:
    return {k: getattr(v, "value", v) for k, v in vars(config).items()}


def cmd_validate(args, argv) -> None:
    data_dir = _data_dir(args)
    counts = validate_dataset(data_dir, _dataset_config(args, data_dir))
    _emit(counts.items())


def cmd_train(args, argv) -> None:
    dataset = _load(args)
    config = _train_config(args)
    out = _out_dir(args)
    write_id_maps(dataset, out)
    model, log = train(dataset, args.model, config, checkpoint_path=out / CHECKPOINT_FILE)
    log.write(out / TRAIN_LOG_FILE)
    write_manifest(
        out,
        build_manifest(
            "train",
            argv,
            config.seed,
            dataset.digest(),
            extra={"model_kind": args.model, "train_config": vars_of(config)},
        ),
    )
    _emit(
        [
            ("model_kind", args.model),
            ("epochs_run", log.epochs_run),
            ("best_epoch", log.best_epoch),
            ("final_loss", log.final_loss),
            ("parameter_count", model.parameter_count()),
            ("checkpoint", out / CHECKPOINT_FILE),
        ]
    )


def cmd_evaluate(args, argv) -> None:
    ckpt = _checkpoint_path(args.model)
    dataset = _load(args, ckpt)
    model = load_model(ckpt, dataset)
    config = _train_config(args)
    out = _out_dir(args, default=ckpt.parent)
    if args.dump_weights and not model.supports_weights:
        raise UsageError(f"model kind {model.kind!r} exposes no member weights")
    report, results = evaluate(
        model,
        dataset,
        k_list=args.k,
        seed=config.seed,
        threads=config.threads,
        with_weights=args.dump_weights,
    )
    report.write(out / EVAL_REPORT_FILE)
    if args.dump_rankings:
        write_rankings(results, dataset, out / "rankings.tsv")
    if args.dump_weights:
        write_weights([r.weights for r in results], dataset, out / "weights.tsv")
    write_manifest(
        out, build_manifest("evaluate", argv, config.seed, dataset.digest(), {"model": str(ckpt)})
    )
    logger.info("evaluation of %s\n%s", ckpt, report.summary())
    _emit(report.as_row().items())


def cmd_sweep_beta(args, argv) -> None:
    dataset = _load(args)
    config = _train_config(args)
    out = _out_dir(args)
    table = sweep_beta(dataset, args.betas, config, model_kind=args.model, k_list=args.k)
    write_tsv(table, out / "beta_sweep.tsv")
    write_manifest(out, build_manifest("sweep-beta", argv, config.seed, dataset.digest()))
    _emit_frame(table)


def cmd_analyze_influence(args, argv) -> None:
    config = _train_config(args)
    out = _out_dir(args)
    dataset_hash = None
    if args.records is not None:
        if not args.records.is_file():
            raise UsageError(f"records file not found: {args.records}")
        records = read_records(args.records)
    else:
        ckpt = _checkpoint_path(args.model)
        dataset = _load(args, ckpt)
        dataset_hash = dataset.digest()
        model = load_model(ckpt, dataset)
        records, weights = extract_influence(
            model, dataset, seed=config.seed, threads=config.threads
        )
        if args.dump_weights:
            write_weights(weights, dataset, out / "weights.tsv")
    write_records(records, out / "influence_records.tsv")
    write_tsv(price_bucket_report(records), out / "price_buckets.tsv")
    low, high = price_bucket_tests(records, args.low_pct, args.high_pct, args.critical_value)
    table = pd.DataFrame([low.as_row("low_price"), high.as_row("high_price")])
    write_tsv(table, out / "chi_square.tsv")
    write_manifest(out, build_manifest("analyze-influence", argv, config.seed, dataset_hash))
    logger.info("%s", low.summary("low price tail"))
    logger.info("%s", high.summary("high price tail"))
    _emit_frame(table)


def cmd_analyze_gmv(args, argv) -> None:
    ckpt = _checkpoint_path(args.model)
    dataset = _load(args, ckpt)
    model = load_model(ckpt, dataset)
    config = _train_config(args)
    out = _out_dir(args)
    curves = gmv_curves(model, dataset, max_rank=args.max_rank, threads=config.threads)
    frame = curves_frame(curves, dataset)
    write_tsv(frame, out / "gmv_curves.tsv")
    if args.group is not None:
        index = dataset.id_maps.index("groups")
        if args.group not in index:
            raise UsageError(f"unknown group id {args.group}")
        write_tsv(rank_profile(model, dataset, index[args.group]), out / "rank_profile.tsv")
    write_manifest(out, build_manifest("analyze-gmv", argv, config.seed, dataset.digest()))
    totals = frame[frame["group_id"] == "all"]
    final = float(totals["cumulative_gmv"].iloc[-1]) if len(totals) else 0.0
    _emit([("groups", len(curves)), ("total_gmv", final)])


def cmd_grad_check(args, argv) -> None:
    config = _train_config(args)
    report = check_predictor_gradients(args.model, seed=config.seed, tolerance=args.tolerance)
    if args.out is not None:
        out = _out_dir(args)
        write_rows(out / "grad_check.tsv", ["field", "value"], report.rows())
        write_manifest(out, build_manifest("grad-check", argv, config.seed))
    _emit(report.rows())
    if not report.passed:
        raise GradCheckFailed(
            f"{len(report.failures)} of {report.n_checked} gradient entries exceed "
            f"tolerance {report.tolerance} (worst {report.max_rel_error:.3g})"
        )


def _run_metrics(run_dir: Path, metric: str) -> list[float]:
    paths = sorted(run_dir.rglob(EVAL_REPORT_FILE))
    if not paths:
        raise DataError(f"{run_dir}: no {EVAL_REPORT_FILE} found")
    values, metric_sets = [], set()
    for path in paths:
        row = EvalReport.read(path).as_row()
        row.pop("n_test_cases", None)
        metric_sets.add(tuple(sorted(row)))
        if metric not in row:
            raise DataError(f"{path}: metric {metric!r} missing")
        values.append(row[metric])
    if len(metric_sets) > 1:
        raise DataError(f"{run_dir}: eval reports carry different metric sets")
    if len(values) < 2:
        raise InsufficientSamplesError(
            f"{run_dir}: {len(values)} seed(s) found, significance needs at least 2"
        )
    return values


def compare_runs(
    run_dirs: Sequence[Path], metric: str = "hr@10", alpha: float = T_TEST_ALPHA
) -> pd.DataFrame:
    """Welch t-test of the best run (by mean) against each other run.

    The best run is starred when it is significantly better than every other.
    """
    samples = {str(run): _run_metrics(Path(run), metric) for run in run_dirs}
    sign = -1.0 if metric.split("@")[0] in LOWER_IS_BETTER else 1.0
    best = max(samples, key=lambda run: (sign * float(np.mean(samples[run])), run))
    rows, all_significant = [], len(samples) > 1
    for run, values in samples.items():
        row = {
            "run": run,
            "n": len(values),
            "mean": float(np.mean(values)),
            "std": float(np.std(values, ddof=1)),
            "t_statistic": float("nan"),
            "p_value": float("nan"),
            "significant": "",
        }
        if run != best:
            test = t_test_two_sample(samples[best], values, alpha)
            better = sign * (np.mean(samples[best]) - np.mean(values)) > 0
            row.update(t_statistic=test.statistic, p_value=test.p_value)
            row["significant"] = "yes" if test.significant and better else "no"
            all_significant = all_significant and test.significant and better
        rows.append(row)
    frame = pd.DataFrame(rows)
    frame["mark"] = ["*" if r == best and all_significant else "" for r in frame["run"]]
    return frame


def cmd_compare(args, argv) -> None:
    table = compare_runs(args.runs, args.metric, args.alpha)
    if args.out is not None:
        write_tsv(table, _out_dir(args) / "compare.tsv")
    _emit_frame(table)


HANDLERS = {
    "synth": cmd_synth,
    "validate": cmd_validate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep-beta": cmd_sweep_beta,
    "analyze-influence": cmd_analyze_influence,
    "analyze-gmv": cmd_analyze_gmv,
    "grad-check": cmd_grad_check,
    "compare": cmd_compare,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    settings.load_environment()
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        HANDLERS[args.command](args, argv)
    except PgrecError as exc:
        print(f"pgrec: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
