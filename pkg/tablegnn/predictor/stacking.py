"""Base-predictor logits for stacking the meta-learner."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Literal

import numpy as np
from loguru import logger
from sklearn.model_selection import KFold

from ..exceptions import InvalidInputError
from ..graph import Table
from .base import BaseColumnPredictor, LogitsMap, PredictorFactory
from .baseline import HashedLinearPredictor

StackingMode = Literal["in_sample", "out_of_fold"]


def _fit(predictor: BaseColumnPredictor, tables: Sequence[Table], strict: bool) -> BaseColumnPredictor:
    if isinstance(predictor, HashedLinearPredictor):
        return predictor.fit(tables, strict=strict)
    return predictor.fit(tables)


def stacking_logits(
    factory: PredictorFactory,
    train_tables: Sequence[Table],
    other_tables: Sequence[Table],
    mode: StackingMode = "in_sample",
    folds: int = 5,
    seed: int = 0,
    strict: bool = True,
) -> tuple[LogitsMap, LogitsMap, BaseColumnPredictor]:
    """Logits for training tables and for every other table.

    ``in_sample``: one predictor fitted on all training tables scores
    everything. ``out_of_fold``: training-table logits come from predictors
    that never saw the table; other tables use the full-train predictor.
    ``strict`` is passed to the full-train fit only.
    """
    predictor = _fit(factory(), train_tables, strict=strict)
    other_logits = predictor.logits_for(other_tables)

    if mode == "in_sample":
        return predictor.logits_for(train_tables), other_logits, predictor
    if mode != "out_of_fold":
        raise InvalidInputError(f"Unknown stacking mode: {mode}")
    if len(train_tables) < folds:
        raise InvalidInputError(
            "Fewer training tables than stacking folds",
            details={"tables": len(train_tables), "folds": folds},
        )

    train_logits: LogitsMap = {}
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    for inner, (fit_idx, held_idx) in enumerate(splitter.split(np.arange(len(train_tables)))):
        inner_predictor = _fit(factory(), [train_tables[i] for i in fit_idx], strict=False)
        train_logits.update(inner_predictor.logits_for([train_tables[i] for i in held_idx]))
        logger.debug(f"out-of-fold stacking: inner fold {inner + 1}/{folds} done")
    ordered = {
        (t.table_id, i): train_logits[(t.table_id, i)]
        for t in train_tables
        for i in range(t.num_columns)
    }
    return ordered, other_logits, predictor
