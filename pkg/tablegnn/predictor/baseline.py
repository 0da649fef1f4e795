"""
Hashed n-gram multinomial logistic regression.

A desk-scale single-column predictor: ψ = featurize(column), logits = ψ W + b,
trained full-batch with the tape, mean NLL and Adam.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from ..exceptions import DataFormatError, TrainingError
from ..gnn import decode_array, encode_array
from ..graph import LabelVocab, Table
from ..numerics import AdamState, GradTape, Tensor, adam_step, add, matmul, scale
from ..schemas import FORMAT_VERSION
from ..training.loss import nll_loss
from .base import BaseColumnPredictor, register_predictor
from .features import featurize


class BaselineConfig(BaseModel):
    feature_width: int = Field(default=1024, ge=16)
    epochs: int = Field(default=300, ge=0)
    learning_rate: float = Field(default=0.05, ge=0.0)
    weight_decay: float = Field(default=0.0, ge=0.0)


@register_predictor
class HashedLinearPredictor(BaseColumnPredictor):
    name = "baseline"

    def __init__(self, vocab: LabelVocab, config: BaselineConfig | None = None):
        super().__init__(vocab)
        self.config = config or BaselineConfig()
        width = self.config.feature_width
        self.weights = np.zeros((width, vocab.k))
        self.bias = np.zeros(vocab.k)

    def _design(self, tables: Sequence[Table]) -> tuple[np.ndarray, np.ndarray]:
        rows, gold = [], []
        for table in tables:
            for column in table.columns:
                if column.gold_label is None:
                    continue
                rows.append(featurize(column.values, self.config.feature_width))
                gold.append(self.vocab.index(column.gold_label))
        return np.array(rows).reshape(len(rows), self.config.feature_width), np.array(gold, dtype=np.int64)

    def fit(self, tables: Sequence[Table], strict: bool = True) -> HashedLinearPredictor:
        """Multinomial logistic regression on labeled columns.

        With ``strict`` every vocabulary class must have an example.
        """
        features, gold = self._design(tables)
        if gold.size == 0:
            raise TrainingError("No labeled columns to train the baseline on")
        if strict:
            counts = np.bincount(gold, minlength=self.vocab.k)
            for idx in np.flatnonzero(counts == 0):
                raise TrainingError(
                    f"Class {self.vocab.name(int(idx))!r} has no training examples",
                    details={"class": self.vocab.name(int(idx))},
                )

        X = Tensor(features)
        params = {
            "W": Tensor(np.zeros((self.config.feature_width, self.vocab.k)), requires_grad=True),
            "b": Tensor(np.zeros(self.vocab.k), requires_grad=True),
        }
        state = AdamState.for_params(params)
        for epoch in range(self.config.epochs):
            with GradTape() as tape:
                logits = add(matmul(X, params["W"]), params["b"])
                loss = scale(nll_loss(logits, gold), 1.0 / gold.size)
            grads = tape.gradient(loss, params)
            params = adam_step(
                params, grads, state, self.config.learning_rate, self.config.weight_decay
            )
            if epoch == 0 or (epoch + 1) % 100 == 0:
                self.logger.debug(f"baseline epoch {epoch + 1}: mean nll {loss.item():.4f}")

        self.weights = params["W"].numpy()
        self.bias = params["b"].numpy()
        self.logger.info(
            f"Fitted baseline on {gold.size} columns, {self.vocab.k} classes, "
            f"{self.config.epochs} epochs"
        )
        return self

    def predict_logits(self, values: Sequence[str]) -> np.ndarray:
        """ψ W + b for one column's cell values."""
        return featurize(values, self.config.feature_width) @ self.weights + self.bias

    def predict_column(self, table: Table, column_index: int) -> np.ndarray:
        return self.predict_logits(table.columns[column_index].values)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.name,
            "config": self.config.model_dump(),
            "vocab": list(self.vocab.names),
            "params": {"W": encode_array(self.weights), "b": encode_array(self.bias)},
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> HashedLinearPredictor:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as f:
                envelope = json.load(f)
        except FileNotFoundError:
            raise DataFormatError(f"Predictor file not found: {path}", details={"path": str(path)})
        except json.JSONDecodeError as e:
            raise DataFormatError(
                f"Predictor file is not valid JSON: {path}",
                details={"path": str(path), "line": e.lineno},
            )
        if not isinstance(envelope, dict):
            raise DataFormatError(
                "Predictor file must hold a JSON object",
                details={"path": str(path), "type": type(envelope).__name__},
            )
        if envelope.get("kind") != cls.name or envelope.get("format_version") != FORMAT_VERSION:
            raise DataFormatError(
                "Not a baseline predictor file",
                details={"path": str(path), "kind": envelope.get("kind")},
            )
        predictor = cls(LabelVocab(envelope["vocab"]), BaselineConfig(**envelope["config"]))
        predictor.weights = decode_array(envelope["params"]["W"], "W")
        predictor.bias = decode_array(envelope["params"]["b"], "b")
        return predictor


def baseline_fit(
    tables: Sequence[Table],
    vocab: LabelVocab,
    config: BaselineConfig | None = None,
) -> HashedLinearPredictor:
    return HashedLinearPredictor(vocab, config).fit(tables)


def predict_logits(model: HashedLinearPredictor, values: Sequence[str]) -> np.ndarray:
    return model.predict_logits(values)
