"""
Cross-validated comparison of the single-column base predictor against
stacked meta-learners, with the frequency-bin and column-count breakdowns.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from ..exceptions import ConfigurationError, InvariantViolation
from ..gnn import GnnConfig
from ..graph import LabelVocab, Table, build_graphs
from ..predictor import LogitsMap, PredictorFactory, stacking_logits
from ..predictor.stacking import StackingMode
from ..training import TrainConfig, fit_graphs
from .analysis import (
    ColumnOutcome,
    bin_names,
    breakdown_by_column_count,
    column_count_key,
    frequency_bins,
)
from .metrics import f_scores, subset_macro, subset_weighted
from .splits import Fold, kfold_split

BASE_NAME = "base"
SUMMARY_COLUMNS = ["config", "fold", "weighted_f1", "macro_f1"]


class FoldScore(BaseModel):
    fold: int
    weighted_f1: float = Field(ge=0.0, le=1.0)
    macro_f1: float = Field(ge=0.0, le=1.0)
    per_class: dict[str, float]


class GroupScore(BaseModel):
    macro_f1: float | None
    weighted_f1: float | None
    columns: int


class EvalReport(BaseModel):
    name: str
    folds: list[FoldScore]
    weighted_mean: float
    weighted_std: float
    macro_mean: float
    macro_std: float
    per_class: dict[str, float]
    bins: dict[str, GroupScore]
    by_column_count: dict[str, GroupScore]


class Improvement(BaseModel):
    """Stacked minus base."""

    macro_f1: float
    weighted_f1: float
    bins: dict[str, float | None]
    by_column_count: dict[str, dict[str, float | None]]


class ExperimentReport(BaseModel):
    folds: int
    seed: int
    stacking_mode: str
    bin_assignment: dict[str, str]
    base: EvalReport
    stacked: dict[str, EvalReport]
    improvements: dict[str, Improvement]

    def reports(self) -> list[EvalReport]:
        return [self.base, *self.stacked.values()]

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                (report.name, score.fold, score.weighted_f1, score.macro_f1)
                for report in self.reports()
                for score in report.folds
            ],
            columns=SUMMARY_COLUMNS,
        )

    def save_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.model_dump(), indent=2) + "\n", encoding="utf-8")
        return path

    def save_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.summary_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def _check_no_leakage(fold: Fold, fitted_on: Sequence[Table]) -> None:
    fold.check_disjoint()
    leaked = {t.table_id for t in fitted_on} & set(fold.test_ids)
    if leaked:
        raise InvariantViolation(
            f"Test tables used for fitting in fold {fold.index}",
            details={"table_ids": sorted(leaked)},
        )


def _base_outcomes(tables: Sequence[Table], logits: LogitsMap, vocab: LabelVocab) -> list[ColumnOutcome]:
    outcomes = []
    for table in tables:
        for idx, column in enumerate(table.columns):
            predicted = int(np.argmax(logits[(table.table_id, idx)]))
            outcomes.append(
                ColumnOutcome(table.table_id, idx, table.num_columns, column.gold_label, vocab.name(predicted))
            )
    return outcomes


def _stacked_outcomes(
    tables: Sequence[Table],
    predictions,
) -> list[ColumnOutcome]:
    widths = {t.table_id: t.num_columns for t in tables}
    golds = {(t.table_id, i): c.gold_label for t in tables for i, c in enumerate(t.columns)}
    return [
        ColumnOutcome(
            p.table_id,
            p.column_index,
            widths[p.table_id],
            golds[(p.table_id, p.column_index)],
            p.label,
        )
        for p in predictions
    ]


def _group_score(per_class, support, classes, columns) -> GroupScore:
    return GroupScore(
        macro_f1=subset_macro(per_class, classes),
        weighted_f1=subset_weighted(per_class, support, classes),
        columns=columns,
    )


def _aggregate(
    name: str,
    fold_outcomes: list[list[ColumnOutcome]],
    vocab: LabelVocab,
    bin_assignment: dict[str, str],
    bins: int,
    column_count_cap: int | None,
) -> EvalReport:
    fold_scores = []
    for index, outcomes in enumerate(fold_outcomes):
        scores = f_scores([o.predicted for o in outcomes], [o.gold for o in outcomes], vocab)
        fold_scores.append(
            FoldScore(
                fold=index,
                weighted_f1=scores.weighted,
                macro_f1=scores.macro,
                per_class=scores.per_class,
            )
        )

    per_class: dict[str, list[float]] = {}
    for score in fold_scores:
        for cls, value in score.per_class.items():
            per_class.setdefault(cls, []).append(value)

    pooled = [o for outcomes in fold_outcomes for o in outcomes]
    pooled_scores = f_scores([o.predicted for o in pooled], [o.gold for o in pooled], vocab)
    bin_report = {}
    for bin_name in bin_names(bins):
        classes = [c for c, b in bin_assignment.items() if b == bin_name]
        columns = sum(1 for o in pooled if bin_assignment.get(o.gold) == bin_name)
        bin_report[bin_name] = _group_score(pooled_scores.per_class, pooled_scores.support, classes, columns)

    by_count = {}
    counts = {}
    for o in pooled:
        key = column_count_key(o.num_columns, column_count_cap)
        counts[key] = counts.get(key, 0) + 1
    for key, scores in breakdown_by_column_count(pooled, vocab, column_count_cap).items():
        by_count[key] = GroupScore(macro_f1=scores.macro, weighted_f1=scores.weighted, columns=counts[key])

    weighted = np.array([s.weighted_f1 for s in fold_scores])
    macro = np.array([s.macro_f1 for s in fold_scores])
    return EvalReport(
        name=name,
        folds=fold_scores,
        # population standard deviation over folds
        weighted_mean=float(weighted.mean()),
        weighted_std=float(weighted.std()),
        macro_mean=float(macro.mean()),
        macro_std=float(macro.std()),
        per_class={c: float(np.mean(v)) for c, v in sorted(per_class.items())},
        bins=bin_report,
        by_column_count=by_count,
    )


def _delta(stacked: float | None, base: float | None) -> float | None:
    if stacked is None or base is None:
        return None
    return stacked - base


def improvement(stacked: EvalReport, base: EvalReport) -> Improvement:
    return Improvement(
        macro_f1=stacked.macro_mean - base.macro_mean,
        weighted_f1=stacked.weighted_mean - base.weighted_mean,
        bins={
            name: _delta(score.macro_f1, base.bins[name].macro_f1)
            for name, score in stacked.bins.items()
        },
        by_column_count={
            key: {
                "macro_f1": _delta(score.macro_f1, base.by_column_count[key].macro_f1),
                "weighted_f1": _delta(score.weighted_f1, base.by_column_count[key].weighted_f1),
            }
            for key, score in stacked.by_column_count.items()
        },
    )


def run_experiment(
    tables: Sequence[Table],
    vocab: LabelVocab,
    predictor_factory: PredictorFactory,
    configs: Sequence[tuple[GnnConfig, TrainConfig]],
    folds: int = 5,
    seed: int = 0,
    val_fraction: float = 0.2,
    stacking_mode: StackingMode = "in_sample",
    stacking_folds: int = 5,
    bins: int = 3,
    column_count_cap: int | None = None,
) -> ExperimentReport:
    """k-fold evaluation of the base predictor and every stacked config.

    Per fold the base predictor is fitted on the training tables, logits
    are produced for every split, each meta-learner is trained on the
    training graphs with model selection on validation, and both base and
    stacked predictions are scored on the test tables.
    """
    names = [gnn_config.name for gnn_config, _ in configs]
    if len(set(names)) != len(names) or BASE_NAME in names:
        raise ConfigurationError("Config names must be unique", details={"configs": names})

    log = logger.bind(component="evaluation")
    by_id = {t.table_id: t for t in tables}
    labeled = [t for t in tables if t.is_fully_labeled()]
    if len(labeled) != len(tables):
        log.warning(f"Skipping {len(tables) - len(labeled)} tables with unlabeled columns")
    bin_assignment = frequency_bins(
        [c.gold_label for t in labeled for c in t.columns], bins=bins, vocab=vocab
    )

    base_outcomes: list[list[ColumnOutcome]] = []
    stacked_outcomes: dict[str, list[list[ColumnOutcome]]] = {name: [] for name in names}
    for fold in kfold_split(labeled, k=folds, seed=seed, val_fraction=val_fraction):
        train = [by_id[i] for i in fold.train_ids]
        val = [by_id[i] for i in fold.val_ids]
        test = [by_id[i] for i in fold.test_ids]
        _check_no_leakage(fold, [*train, *val])

        missing = set(vocab.names) - {c.gold_label for t in train for c in t.columns}
        if missing:
            log.warning(f"fold {fold.index}: classes without training columns: {sorted(missing)}")
        train_logits, other_logits, _ = stacking_logits(
            predictor_factory,
            train,
            [*val, *test],
            mode=stacking_mode,
            folds=stacking_folds,
            seed=seed,
            strict=False,
        )
        base_outcomes.append(_base_outcomes(test, other_logits, vocab))

        logits = {**train_logits, **other_logits}
        train_graphs = build_graphs(train, logits, vocab, require_labels=True)
        val_graphs = build_graphs(val, logits, vocab, require_labels=True)
        test_graphs = build_graphs(test, logits, vocab, require_labels=True)
        for gnn_config, train_config in configs:
            model, history = fit_graphs(train_graphs, val_graphs, vocab, train_config, gnn_config)
            predictions = [p for graph in test_graphs for p in model.predict(graph)]
            stacked_outcomes[gnn_config.name].append(_stacked_outcomes(test, predictions))
            log.info(f"fold {fold.index}: {gnn_config.name} trained, best epoch {history.best_epoch}")
        log.info(f"fold {fold.index + 1}/{folds} done: {len(test)} test tables")

    base = _aggregate(BASE_NAME, base_outcomes, vocab, bin_assignment, bins, column_count_cap)
    stacked = {
        name: _aggregate(name, outcomes, vocab, bin_assignment, bins, column_count_cap)
        for name, outcomes in stacked_outcomes.items()
    }
    for report in [base, *stacked.values()]:
        log.info(
            f"{report.name}: macro {report.macro_mean:.4f} ± {report.macro_std:.4f}, "
            f"weighted {report.weighted_mean:.4f} ± {report.weighted_std:.4f}"
        )
    return ExperimentReport(
        folds=folds,
        seed=seed,
        stacking_mode=stacking_mode,
        bin_assignment=bin_assignment,
        base=base,
        stacked=stacked,
        improvements={name: improvement(report, base) for name, report in stacked.items()},
    )
