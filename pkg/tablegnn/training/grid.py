from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
from loguru import logger

from ..exceptions import InvalidInputError
from ..gnn import GnnConfig, GnnFamily, GnnModel
from ..graph import LabelVocab, Table, build_graphs
from .config import TrainConfig
from .trainer import TrainingHistory, fit_graphs

GRID_COLUMNS = ["family", "steps", "heads", "val_macro_f1", "best_epoch"]


@dataclass(frozen=True)
class GridCell:
    family: str
    steps: int
    heads: int
    val_macro_f1: float | None
    best_epoch: int


@dataclass
class GridResult:
    best_config: GnnConfig
    best_model: GnnModel
    best_history: TrainingHistory
    cells: list[GridCell]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(c.family, c.steps, c.heads, c.val_macro_f1, c.best_epoch) for c in self.cells],
            columns=GRID_COLUMNS,
        )

    def save_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def grid_cells(family: GnnFamily | str, config: TrainConfig) -> list[tuple[int, int]]:
    """(steps, heads) cells ordered by steps then heads."""
    family = GnnFamily(family)
    steps = sorted(set(config.grid_steps))
    heads = sorted(set(config.grid_heads)) if family is GnnFamily.GAT else [1]
    if not steps or not heads:
        raise InvalidInputError("Grid search needs a nonempty grid")
    return [(s, h) for s in steps for h in heads]


def grid_search(
    train_tables: Sequence[Table],
    val_tables: Sequence[Table],
    base_logits: Mapping[tuple[str, int], Sequence[float]],
    config: TrainConfig,
    family: GnnFamily | str,
    vocab: LabelVocab | None = None,
    base_gnn_config: GnnConfig | None = None,
) -> GridResult:
    """Train one model per cell and keep the best validation macro F1.

    Ties go to the smaller S, then the smaller K.
    """
    family = GnnFamily(family)
    vocab = vocab or LabelVocab.from_tables([*train_tables, *val_tables])
    train_graphs = build_graphs(train_tables, base_logits, vocab, require_labels=True)
    val_graphs = build_graphs(val_tables, base_logits, vocab, require_labels=True)
    template = base_gnn_config or GnnConfig(family=family, steps=1)

    cells: list[GridCell] = []
    best: tuple[float, GnnConfig, GnnModel, TrainingHistory] | None = None
    for steps, heads in grid_cells(family, config):
        gnn_config = template.model_copy(update={"family": family, "steps": steps, "heads": heads})
        model, history = fit_graphs(train_graphs, val_graphs, vocab, config, gnn_config)
        score = max(
            (r.val_macro_f1 for r in history.records if r.val_macro_f1 is not None),
            default=None,
        )
        cells.append(GridCell(family.value, steps, heads, score, history.best_epoch))
        logger.info(f"grid cell {gnn_config.name}: val macro F1 {score}")
        ranked = score if score is not None else float("-inf")
        if best is None or ranked > best[0]:
            best = (ranked, gnn_config, model, history)

    _, best_config, best_model, best_history = best
    logger.info(f"grid search selected {best_config.name}")
    return GridResult(best_config, best_model, best_history, cells)
