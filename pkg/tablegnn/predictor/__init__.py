from .base import (
    PREDICTORS,
    BaseColumnPredictor,
    LogitsMap,
    PredictorFactory,
    create_predictor,
    register_predictor,
)
from .baseline import BaselineConfig, HashedLinearPredictor, baseline_fit, predict_logits
from .features import featurize
from .logits_file import LogitsFilePredictor, load_logits, save_logits
from .stacking import stacking_logits

__all__ = [
    "PREDICTORS",
    "BaseColumnPredictor",
    "BaselineConfig",
    "HashedLinearPredictor",
    "LogitsFilePredictor",
    "LogitsMap",
    "PredictorFactory",
    "create_predictor",
    "baseline_fit",
    "featurize",
    "load_logits",
    "predict_logits",
    "register_predictor",
    "save_logits",
    "stacking_logits",
]
