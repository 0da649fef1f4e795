"""
Command-line entry point.

Exit codes: 0 success, 2 usage or parse problems, 3 data-join failures,
4 internal invariant violations and unexpected errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from dotenv import load_dotenv
from loguru import logger
from sklearn.model_selection import train_test_split

from .config import ConfigManager
from .evaluation import (
    EvaluationConfig,
    resolve_configs,
    run_experiment,
    synthesize_dependency_dataset,
)
from .exceptions import (
    ConfigurationError,
    DataFormatError,
    exit_code_for,
    handle_exception,
    with_exception_handling,
)
from .gnn import GnnConfig, GnnFamily, load_model, save_model
from .graph import LabelVocab, Table, build_graphs, load_tables, save_tables
from .predictor import (
    BaselineConfig,
    HashedLinearPredictor,
    LogitsFilePredictor,
    LogitsMap,
    load_logits,
    save_logits,
    stacking_logits,
)
from .run_context import RunContext, reset_run_context, set_run_context
from .schemas import PredictionRecord, RunManifest
from .training import TrainConfig, fit, grid_search

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} | {message}"

COMMAND_STREAMS = {
    "train": ["split", "shuffle", "init"],
    "grid": ["split", "shuffle", "init"],
    "predict": [],
    "evaluate": ["split", "shuffle", "init"],
    "synth": ["synth"],
    "logits": [],
}


def configure_logging(level: str | None = None) -> None:
    """Single stderr sink; stdout stays free for command output."""
    logger.remove()
    logger.add(
        sys.stderr,
        level=(level or os.getenv("LOG_LEVEL") or "INFO").upper(),
        format=LOG_FORMAT,
    )


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _sibling(path: str | Path, suffix: str) -> Path:
    return Path(path).with_suffix(suffix)


def write_manifest(
    output: str | Path,
    ctx: RunContext,
    config: dict[str, Any],
    inputs: dict[str, str | Path | None],
    outputs: dict[str, str | Path],
) -> Path:
    """``<output>.manifest.json`` describing how ``output`` was produced."""
    manifest = RunManifest(
        command=ctx.command,
        seed=ctx.seed,
        config=config,
        inputs={k: str(v) if v is not None else None for k, v in inputs.items()},
        outputs={k: str(v) for k, v in outputs.items()},
        rng_streams=sorted(set(ctx.streams) | set(COMMAND_STREAMS.get(ctx.command, []))),
    )
    path = _sibling(output, ".manifest.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.model_dump(), indent=2) + "\n", encoding="utf-8")
    return path


def _baseline_config(manager: ConfigManager, args: argparse.Namespace) -> BaselineConfig:
    values = manager.get_component_config("predictor", {"epochs": getattr(args, "base_epochs", None)})
    try:
        return BaselineConfig(**values)
    except ValueError as e:
        raise ConfigurationError(f"Invalid predictor config: {e}", details={"values": values})


def _stacking_options(manager: ConfigManager, args: argparse.Namespace) -> tuple[str, int]:
    values = manager.get_component_config(
        "predictor", {"stacking_mode": getattr(args, "stacking_mode", None)}
    )
    if values["stacking_mode"] not in ("in_sample", "out_of_fold"):
        raise ConfigurationError(
            f"Unknown stacking mode: {values['stacking_mode']}",
            details={"allowed": ["in_sample", "out_of_fold"]},
        )
    return values["stacking_mode"], int(values["stacking_folds"])


def _train_val_split(
    tables: list[Table],
    val_path: str | None,
    val_fraction: float,
    ctx: RunContext,
) -> tuple[list[Table], list[Table]]:
    if val_path:
        return tables, load_tables(val_path)
    if len(tables) < 2 or val_fraction <= 0:
        return tables, []
    random_state = int(ctx.rng("split").integers(2**31 - 1))
    train_idx, val_idx = train_test_split(
        np.arange(len(tables)), test_size=val_fraction, random_state=random_state
    )
    return [tables[i] for i in sorted(train_idx)], [tables[i] for i in sorted(val_idx)]


def _training_logits(
    args: argparse.Namespace,
    manager: ConfigManager,
    vocab: LabelVocab,
    train_tables: list[Table],
    val_tables: list[Table],
    seed: int,
) -> tuple[LogitsMap, Path | None]:
    """Join external logits, or fit the baseline and save it next to the model."""
    if args.logits:
        predictor = LogitsFilePredictor(vocab, path=args.logits)
        return predictor.logits_for([*train_tables, *val_tables]), None

    base_config = _baseline_config(manager, args)
    mode, folds = _stacking_options(manager, args)
    train_logits, val_logits, predictor = stacking_logits(
        lambda: HashedLinearPredictor(vocab, base_config),
        train_tables,
        val_tables,
        mode=mode,
        folds=folds,
        seed=seed,
    )
    base_path = predictor.save(_sibling(args.out_model, ".base.json"))
    return {**train_logits, **val_logits}, base_path


def _model_configs(
    args: argparse.Namespace,
    manager: ConfigManager,
    seed: int,
) -> tuple[GnnConfig, TrainConfig]:
    family = GnnFamily(args.family)
    gnn_config = GnnConfig.preset(
        family,
        manager,
        steps=getattr(args, "steps", None),
        heads=getattr(args, "heads", None),
        hidden_dim=args.hidden_dim,
        activation=args.activation,
        share_weights=args.share_weights,
        seed=seed,
    )
    train_config = TrainConfig.for_family(
        family,
        manager,
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        epochs=args.epochs,
        batch_size=args.batch_size,
        grid_heads=getattr(args, "grid_heads", None),
        grid_steps=getattr(args, "grid_steps", None),
        seed=seed,
    )
    return gnn_config, train_config


@with_exception_handling("train")
def cmd_train(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    tables = load_tables(args.data)
    vocab = LabelVocab.from_tables(tables)
    gnn_config, train_config = _model_configs(args, manager, ctx.seed)
    val_fraction = EvaluationConfig.load(manager, val_fraction=args.val_fraction).val_fraction
    train_tables, val_tables = _train_val_split(tables, args.val_data, val_fraction, ctx)

    logits, base_path = _training_logits(args, manager, vocab, train_tables, val_tables, ctx.seed)
    model, history = fit(train_tables, val_tables, logits, train_config, gnn_config, vocab)

    model_path = save_model(model, args.out_model)
    history_path = history.save_csv(_sibling(args.out_model, ".history.csv"))
    outputs = {"model": model_path, "history": history_path}
    if base_path is not None:
        outputs["base"] = base_path
    write_manifest(
        model_path,
        ctx,
        {
            "argv": args.argv,
            "gnn": gnn_config.model_dump(mode="json"),
            "training": train_config.model_dump(mode="json"),
            "val_fraction": val_fraction,
        },
        {"data": args.data, "val_data": args.val_data, "logits": args.logits},
        outputs,
    )
    logger.info(f"Saved {gnn_config.name} to {model_path} (best epoch {history.best_epoch})")
    return 0


@with_exception_handling("grid")
def cmd_grid(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    tables = load_tables(args.data)
    vocab = LabelVocab.from_tables(tables)
    gnn_config, train_config = _model_configs(args, manager, ctx.seed)
    val_fraction = EvaluationConfig.load(manager, val_fraction=args.val_fraction).val_fraction
    train_tables, val_tables = _train_val_split(tables, args.val_data, val_fraction, ctx)

    logits, base_path = _training_logits(args, manager, vocab, train_tables, val_tables, ctx.seed)
    result = grid_search(
        train_tables, val_tables, logits, train_config, gnn_config.family, vocab, gnn_config
    )

    model_path = save_model(result.best_model, args.out_model)
    cells_path = result.save_csv(_sibling(args.out_model, ".grid.csv"))
    history_path = result.best_history.save_csv(_sibling(args.out_model, ".history.csv"))
    outputs = {"model": model_path, "cells": cells_path, "history": history_path}
    if base_path is not None:
        outputs["base"] = base_path
    write_manifest(
        model_path,
        ctx,
        {
            "argv": args.argv,
            "gnn": result.best_config.model_dump(mode="json"),
            "training": train_config.model_dump(mode="json"),
            "val_fraction": val_fraction,
        },
        {"data": args.data, "val_data": args.val_data, "logits": args.logits},
        outputs,
    )
    return 0


@with_exception_handling("predict")
def cmd_predict(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    model = load_model(args.model)
    tables = load_tables(args.data)
    if args.logits:
        logits = load_logits(args.logits, model.vocab)
    else:
        base_path = Path(args.base) if args.base else _sibling(args.model, ".base.json")
        base = HashedLinearPredictor.load(base_path)
        if base.vocab != model.vocab:
            raise DataFormatError(
                "Base predictor and model disagree on the label vocabulary",
                details={"base": list(base.vocab.names), "model": list(model.vocab.names)},
            )
        logits = base.logits_for(tables)

    records = [
        PredictionRecord(
            table_id=p.table_id,
            column_index=p.column_index,
            label=p.label,
            probabilities=dict(zip(model.vocab.names, p.probabilities.tolist())),
        )
        for graph in build_graphs(tables, logits, model.vocab)
        for p in model.predict(graph)
    ]
    lines = [record.model_dump_json() for record in records]
    if args.out == "-":
        sys.stdout.write("".join(line + "\n" for line in lines))
        sys.stdout.flush()
        return 0

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")
    write_manifest(
        out,
        ctx,
        {"argv": args.argv, "gnn": model.config.model_dump(mode="json")},
        {"model": args.model, "data": args.data, "logits": args.logits, "base": args.base},
        {"predictions": out},
    )
    logger.info(f"Wrote {len(records)} predictions to {out}")
    return 0


@with_exception_handling("evaluate")
def cmd_evaluate(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    tables = load_tables(args.data)
    vocab = LabelVocab.from_tables(tables)
    eval_config = EvaluationConfig.load(
        manager,
        folds=args.folds,
        configs=args.configs,
        bins=args.bins,
        column_count_cap=args.column_count_cap,
        val_fraction=args.val_fraction,
    )
    configs = resolve_configs(
        eval_config.configs,
        manager,
        seed=ctx.seed,
        epochs=args.epochs,
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
    )
    mode, stacking_folds = _stacking_options(manager, args)
    if args.logits:
        preloaded = load_logits(args.logits, vocab)

        def factory():
            return LogitsFilePredictor(vocab, logits=preloaded)

    else:
        base_config = _baseline_config(manager, args)

        def factory():
            return HashedLinearPredictor(vocab, base_config)

    report = run_experiment(
        tables,
        vocab,
        factory,
        configs,
        folds=eval_config.folds,
        seed=ctx.seed,
        val_fraction=eval_config.val_fraction,
        stacking_mode=mode,
        stacking_folds=stacking_folds,
        bins=eval_config.bins,
        column_count_cap=eval_config.column_count_cap,
    )
    report_path = report.save_json(args.report)
    summary_path = report.save_csv(_sibling(args.report, ".csv"))
    write_manifest(
        report_path,
        ctx,
        {
            "argv": args.argv,
            "evaluation": eval_config.model_dump(mode="json"),
            "configs": [
                {"gnn": g.model_dump(mode="json"), "training": t.model_dump(mode="json")}
                for g, t in configs
            ],
            "stacking_mode": mode,
        },
        {"data": args.data, "logits": args.logits},
        {"report": report_path, "summary": summary_path},
    )
    return 0


@with_exception_handling("synth")
def cmd_synth(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    num_tables = EvaluationConfig.load(manager, synthetic_tables=args.tables).synthetic_tables
    tables, _ = synthesize_dependency_dataset(
        num_tables,
        seed=ctx.seed,
        imbalance=args.imbalance,
        filler_columns=(args.min_fillers, args.max_fillers),
    )
    count = save_tables(tables, args.out)
    write_manifest(
        args.out,
        ctx,
        {
            "argv": args.argv,
            "tables": num_tables,
            "imbalance": args.imbalance,
            "filler_columns": [args.min_fillers, args.max_fillers],
        },
        {},
        {"data": args.out},
    )
    logger.info(f"Wrote {count} synthetic tables to {args.out}")
    return 0


@with_exception_handling("logits")
def cmd_logits(args: argparse.Namespace, ctx: RunContext, manager: ConfigManager) -> int:
    tables = load_tables(args.data)
    outputs: dict[str, str | Path] = {"logits": args.out}
    if args.base:
        predictor = HashedLinearPredictor.load(args.base)
    else:
        predictor = HashedLinearPredictor(LabelVocab.from_tables(tables), _baseline_config(manager, args))
        predictor.fit(tables)
        outputs["base"] = predictor.save(_sibling(args.out, ".base.json"))
    count = save_logits(predictor.logits_for(tables), args.out)
    write_manifest(
        args.out,
        ctx,
        {"argv": args.argv, "predictor": predictor.config.model_dump(mode="json")},
        {"data": args.data, "base": args.base},
        outputs,
    )
    logger.info(f"Wrote {count} logits records to {args.out}")
    return 0


def _add_model_flags(parser: argparse.ArgumentParser, grid: bool = False) -> None:
    parser.add_argument("--data", required=True, help="Dataset JSONL")
    parser.add_argument("--val-data", help="Validation dataset JSONL; otherwise split from --data")
    parser.add_argument("--val-fraction", type=float, help="Validation share when splitting --data")
    parser.add_argument("--logits", help="Base-predictor logits JSONL; otherwise fit the baseline")
    parser.add_argument("--family", choices=[f.value for f in GnnFamily], default="gat")
    if not grid:
        parser.add_argument("--steps", type=int, help="Message-passing steps S")
        parser.add_argument("--heads", type=int, help="Attention heads K (gat)")
    else:
        parser.add_argument("--grid-heads", type=_int_list, help="e.g. 1,2,4,8,12")
        parser.add_argument("--grid-steps", type=_int_list, help="e.g. 1,2,3,4")
    parser.add_argument("--hidden-dim", type=int)
    parser.add_argument("--activation", choices=["relu", "identity"])
    parser.add_argument("--share-weights", action="store_true", default=None, help="ggnn only")
    _add_optimizer_flags(parser)
    parser.add_argument("--stacking-mode", choices=["in_sample", "out_of_fold"])
    parser.add_argument("--base-epochs", type=int, help="Baseline predictor epochs")
    parser.add_argument("--out-model", required=True, help="Model JSON output")


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int, help="Defaults to the family preset")
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--weight-decay", type=float)


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="User YAML config with one section per component")
    parser.add_argument(
        "--log-level", default=default, help="DEBUG, INFO, WARNING, ... (default: $LOG_LEVEL or INFO)"
    )
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand; a value after it wins
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    parser = argparse.ArgumentParser(
        prog="tablegnn",
        description="Column type annotation by message passing over table column graphs",
    )
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="Train one meta-learner")
    _add_model_flags(train)
    train.set_defaults(handler=cmd_train)

    grid = sub.add_parser("grid", parents=[common], help="Grid search over steps (and heads for gat)")
    _add_model_flags(grid, grid=True)
    grid.set_defaults(handler=cmd_grid)

    predict = sub.add_parser("predict", parents=[common], help="Per-column labels and probabilities as JSONL")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True)
    predict.add_argument("--out", required=True, help="Output JSONL, or - for stdout")
    predict.add_argument("--logits", help="Logits JSONL for the input tables")
    predict.add_argument("--base", help="Baseline predictor JSON (default: <model>.base.json)")
    predict.set_defaults(handler=cmd_predict)

    evaluate = sub.add_parser("evaluate", parents=[common], help="Cross-validated comparison against the base predictor")
    evaluate.add_argument("--data", required=True)
    evaluate.add_argument("--logits", help="Logits JSONL; otherwise the baseline is fitted per fold")
    evaluate.add_argument("--folds", type=int)
    evaluate.add_argument("--configs", help="family[:steps[:heads]],... (default: gat,gcn,ggnn)")
    evaluate.add_argument("--bins", type=int)
    evaluate.add_argument("--column-count-cap", type=int)
    evaluate.add_argument("--val-fraction", type=float)
    evaluate.add_argument("--stacking-mode", choices=["in_sample", "out_of_fold"])
    evaluate.add_argument("--base-epochs", type=int)
    _add_optimizer_flags(evaluate)
    evaluate.add_argument("--report", required=True, help="Report JSON; the CSV summary goes next to it")
    evaluate.set_defaults(handler=cmd_evaluate)

    synth = sub.add_parser("synth", parents=[common], help="Emit the planted-dependency dataset")
    synth.add_argument("--tables", type=int)
    synth.add_argument("--imbalance", type=float, default=0.0)
    synth.add_argument("--min-fillers", type=int, default=0)
    synth.add_argument("--max-fillers", type=int, default=2)
    synth.add_argument("--out", required=True)
    synth.set_defaults(handler=cmd_synth)

    logits = sub.add_parser("logits", parents=[common], help="Write base-predictor logits JSONL")
    logits.add_argument("--data", required=True)
    logits.add_argument("--base", help="Fitted baseline JSON; otherwise fit on --data")
    logits.add_argument("--base-epochs", type=int)
    logits.add_argument("--out", required=True)
    logits.set_defaults(handler=cmd_logits)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    args.argv = list(argv) if argv is not None else sys.argv[1:]
    configure_logging(args.log_level)

    ctx = RunContext(seed=args.seed, command=args.command)
    token = set_run_context(ctx)
    try:
        manager = ConfigManager(args.config)
    except Exception as exc:
        handle_exception(exc, {"operation": "load_config"})
        reset_run_context(token)
        return exit_code_for(exc)
    try:
        return args.handler(args, ctx, manager)
    except Exception as exc:
        # already logged by with_exception_handling
        return exit_code_for(exc)
    finally:
        reset_run_context(token)
