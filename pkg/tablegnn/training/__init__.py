from .config import TrainConfig
from .grid import GridCell, GridResult, grid_cells, grid_search
from .loss import nll_loss
from .trainer import (
    EpochRecord,
    TrainingHistory,
    fit,
    fit_graphs,
    predict_classes,
    validation_macro_f1,
)

__all__ = [
    "EpochRecord",
    "GridCell",
    "GridResult",
    "TrainConfig",
    "TrainingHistory",
    "fit",
    "fit_graphs",
    "grid_cells",
    "grid_search",
    "nll_loss",
    "predict_classes",
    "validation_macro_f1",
]
