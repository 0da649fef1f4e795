"""
Meta-learner training: mini-batch Adam on the summed node NLL, with the
parameters of the best validation macro F1 epoch kept in memory.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from sklearn.metrics import f1_score

from ..exceptions import InvalidInputError
from ..gnn import GnnConfig, GnnModel, GnnParams, model_forward
from ..graph import ColumnGraph, LabelVocab, Table, build_graphs, iter_batches
from ..numerics import AdamState, GradTape, adam_step
from ..run_context import derive_rng
from .config import TrainConfig
from .loss import nll_loss

HISTORY_COLUMNS = ["epoch", "train_loss", "val_macro_f1"]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_macro_f1: float | None


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.epoch, r.train_loss, r.val_macro_f1) for r in self.records],
            columns=HISTORY_COLUMNS,
        )

    def save_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def _macro_f1(gold: np.ndarray, predicted: np.ndarray) -> float:
    return float(f1_score(gold, predicted, average="macro", zero_division=0))


def predict_classes(
    graphs: Sequence[ColumnGraph],
    params: GnnParams,
    gnn_config: GnnConfig,
    batch_size: int = 32,
) -> np.ndarray:
    """Argmax class per node, graphs in the given order."""
    predicted = [
        np.argmax(model_forward(batch, params, gnn_config).data, axis=1)
        for batch in iter_batches(graphs, batch_size)
    ]
    return np.concatenate(predicted) if predicted else np.zeros(0, dtype=np.int64)


def validation_macro_f1(
    graphs: Sequence[ColumnGraph],
    params: GnnParams,
    gnn_config: GnnConfig,
    batch_size: int = 32,
) -> float | None:
    if not graphs:
        return None
    gold = np.concatenate([g.gold for g in graphs])
    return _macro_f1(gold, predict_classes(graphs, params, gnn_config, batch_size))


def fit_graphs(
    train_graphs: Sequence[ColumnGraph],
    val_graphs: Sequence[ColumnGraph],
    vocab: LabelVocab,
    config: TrainConfig,
    gnn_config: GnnConfig,
) -> tuple[GnnModel, TrainingHistory]:
    """Train on prebuilt labeled graphs."""
    if not train_graphs:
        raise InvalidInputError("Empty training set")
    if vocab.k < 2:
        raise InvalidInputError("Training needs at least two classes", details={"k": vocab.k})
    for g in (*train_graphs, *val_graphs):
        if g.gold is None:
            raise InvalidInputError(
                f"Table {g.table_id!r} has unlabeled columns",
                details={"table_id": g.table_id},
            )

    log = logger.bind(component="training", model=gnn_config.name)
    model = GnnModel.initialize(gnn_config, vocab, seed=config.seed)
    params = model.params
    state = AdamState.for_params(params)
    shuffle_rng = derive_rng(config.seed, "shuffle")
    train_nodes = sum(g.num_nodes for g in train_graphs)

    history = TrainingHistory()
    best_score = -np.inf
    best_params = params
    for epoch in range(1, config.epochs + 1):
        epoch_loss = 0.0
        for batch in iter_batches(train_graphs, config.batch_size, shuffle_rng):
            with GradTape() as tape:
                logits = model_forward(batch, params, gnn_config)
                loss = nll_loss(logits, batch.gold)
            grads = tape.gradient(loss, params)
            params = adam_step(params, grads, state, config.learning_rate, config.weight_decay)
            epoch_loss += loss.item()

        val_macro = validation_macro_f1(val_graphs, params, gnn_config, config.batch_size)
        record = EpochRecord(epoch, epoch_loss / train_nodes, val_macro)
        history.records.append(record)
        log.debug(f"epoch {epoch}: train_loss={record.train_loss:.5f} val_macro_f1={val_macro}")

        # without validation data the last epoch wins
        score = val_macro if val_macro is not None else float(epoch)
        if score > best_score:
            best_score = score
            best_params = params
            history.best_epoch = epoch

    if config.epochs == 0:
        history.best_epoch = 0
    log.info(
        f"trained {config.epochs} epochs on {len(train_graphs)} tables; "
        f"best epoch {history.best_epoch} (val macro F1 {best_score if val_graphs else 'n/a'})"
    )
    return GnnModel(gnn_config, best_params, vocab), history


def fit(
    train_tables: Sequence[Table],
    val_tables: Sequence[Table],
    base_logits: Mapping[tuple[str, int], Sequence[float]],
    config: TrainConfig,
    gnn_config: GnnConfig,
    vocab: LabelVocab | None = None,
) -> tuple[GnnModel, TrainingHistory]:
    """Join tables with base-predictor logits, then train the meta-learner."""
    if not train_tables:
        raise InvalidInputError("Empty training set")
    vocab = vocab or LabelVocab.from_tables([*train_tables, *val_tables])
    train_graphs = build_graphs(train_tables, base_logits, vocab, require_labels=True)
    val_graphs = build_graphs(val_tables, base_logits, vocab, require_labels=True)
    return fit_graphs(train_graphs, val_graphs, vocab, config, gnn_config)
