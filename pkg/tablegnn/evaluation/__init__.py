from .analysis import (
    ColumnOutcome,
    bin_names,
    breakdown_by_column_count,
    column_count_key,
    frequency_bins,
)
from .config import EvaluationConfig, parse_config_specs, resolve_configs
from .experiment import (
    EvalReport,
    ExperimentReport,
    FoldScore,
    GroupScore,
    Improvement,
    improvement,
    run_experiment,
)
from .metrics import FScores, f_scores, subset_macro, subset_weighted
from .splits import Fold, kfold_split
from .synthetic import (
    AMBIGUOUS_CLASSES,
    AMBIGUOUS_PAIRS,
    CLASSES,
    FILLER_CLASSES,
    filler_weights,
    synthesize_dependency_dataset,
)

__all__ = [
    "AMBIGUOUS_CLASSES",
    "AMBIGUOUS_PAIRS",
    "CLASSES",
    "ColumnOutcome",
    "EvalReport",
    "EvaluationConfig",
    "ExperimentReport",
    "FILLER_CLASSES",
    "FScores",
    "Fold",
    "FoldScore",
    "GroupScore",
    "Improvement",
    "bin_names",
    "breakdown_by_column_count",
    "column_count_key",
    "f_scores",
    "filler_weights",
    "frequency_bins",
    "improvement",
    "kfold_split",
    "parse_config_specs",
    "resolve_configs",
    "run_experiment",
    "subset_macro",
    "subset_weighted",
    "synthesize_dependency_dataset",
]
