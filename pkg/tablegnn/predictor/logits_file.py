"""
Logits files: externally produced single-column predictions.

JSON Lines, one column per line::

    {"table_id": str, "column_index": int, "logits": [float, ...]}

Contents are taken verbatim as raw (pre-softmax) logits.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import DataFormatError, JoinError
from ..graph import LabelVocab, Table
from ..schemas import LogitsRecord
from .base import BaseColumnPredictor, LogitsMap, register_predictor


def load_logits(path: str | Path, vocab: LabelVocab) -> LogitsMap:
    """Validated (table_id, column_index) -> logits map; errors cite the line."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"Logits file not found: {path}", details={"path": str(path)})
    logits: LogitsMap = {}
    first_seen: dict[tuple[str, int], int] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = LogitsRecord.model_validate_json(line)
            except PydanticValidationError as e:
                raise DataFormatError(
                    f"Invalid logits record at line {line_no}",
                    details={"path": str(path), "line": line_no, "error": e.errors(include_url=False)},
                )
            key = (record.table_id, record.column_index)
            if key in first_seen:
                raise DataFormatError(
                    f"Duplicate logits for {key} at line {line_no}",
                    details={"path": str(path), "line": line_no, "first_line": first_seen[key]},
                )
            if len(record.logits) != vocab.k:
                raise DataFormatError(
                    f"Line {line_no} has {len(record.logits)} logits, expected k={vocab.k}",
                    details={"path": str(path), "line": line_no, "expected_k": vocab.k},
                )
            values = np.array(record.logits, dtype=np.float64)
            if not np.all(np.isfinite(values)):
                raise DataFormatError(
                    f"Non-finite logits at line {line_no}",
                    details={"path": str(path), "line": line_no},
                )
            first_seen[key] = line_no
            logits[key] = values
    return logits


def save_logits(logits: Mapping[tuple[str, int], Sequence[float]], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for (table_id, column_index), row in logits.items():
            record = LogitsRecord(
                table_id=table_id,
                column_index=column_index,
                logits=[float(x) for x in row],
            )
            f.write(json.dumps(record.model_dump(), ensure_ascii=False) + "\n")
    return len(logits)


@register_predictor
class LogitsFilePredictor(BaseColumnPredictor):
    """Serves logits read from a file (e.g. produced by an external model)."""

    name = "logits-file"

    def __init__(self, vocab: LabelVocab, path: str | Path | None = None, logits: LogitsMap | None = None):
        super().__init__(vocab)
        if logits is None and path is None:
            raise DataFormatError("LogitsFilePredictor needs a path or a logits map")
        self.logits = dict(logits) if logits is not None else load_logits(path, vocab)

    def fit(self, tables: Sequence[Table]) -> LogitsFilePredictor:
        return self

    def predict_column(self, table: Table, column_index: int) -> np.ndarray:
        key = (table.table_id, column_index)
        try:
            return self.logits[key]
        except KeyError:
            raise JoinError(
                f"No logits for table {table.table_id!r} column {column_index}",
                details={"table_id": table.table_id, "column_index": column_index},
            )
