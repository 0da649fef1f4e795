from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from typing import ClassVar

import numpy as np
from loguru import logger

from ..exceptions import ConfigurationError
from ..graph import LabelVocab, Table

LogitsMap = dict[tuple[str, int], np.ndarray]


class BaseColumnPredictor(ABC):
    """Single-column predictor producing k raw logits per column."""

    name: ClassVar[str] = ""

    def __init__(self, vocab: LabelVocab):
        self.vocab = vocab
        self.logger = logger.bind(predictor=self.__class__.__name__)

    @abstractmethod
    def fit(self, tables: Sequence[Table]) -> BaseColumnPredictor:
        """Train on labeled tables; returns self."""

    @abstractmethod
    def predict_column(self, table: Table, column_index: int) -> np.ndarray:
        """Raw pre-softmax scores (length k) for one column."""

    def predict_table(self, table: Table) -> np.ndarray:
        return np.stack([self.predict_column(table, i) for i in range(table.num_columns)])

    def logits_for(self, tables: Sequence[Table]) -> LogitsMap:
        logits: LogitsMap = {}
        for table in tables:
            for idx, row in enumerate(self.predict_table(table)):
                logits[(table.table_id, idx)] = row
        return logits


PREDICTORS: dict[str, type[BaseColumnPredictor]] = {}


def register_predictor(cls: type[BaseColumnPredictor]) -> type[BaseColumnPredictor]:
    if not cls.name:
        raise ConfigurationError(f"Predictor {cls.__name__} has no name")
    PREDICTORS[cls.name] = cls
    return cls


def create_predictor(name: str, vocab: LabelVocab, **kwargs) -> BaseColumnPredictor:
    try:
        cls = PREDICTORS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown predictor: {name}",
            details={"available": sorted(PREDICTORS)},
        )
    return cls(vocab, **kwargs)


PredictorFactory = Callable[[], BaseColumnPredictor]
