from datetime import datetime, timezone
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

FORMAT_VERSION = 1


class ColumnRecord(BaseModel):
    """One column of a dataset line."""

    model_config = ConfigDict(extra="forbid")

    values: list[str]
    label: str | None = None


class TableRecord(BaseModel):
    """One line of the dataset JSONL file."""

    model_config = ConfigDict(extra="forbid")

    table_id: str
    columns: list[ColumnRecord] = Field(min_length=1)


class LogitsRecord(BaseModel):
    """One line of a logits JSONL file: raw pre-softmax scores of a column."""

    model_config = ConfigDict(extra="forbid")

    table_id: str
    column_index: int = Field(ge=0)
    logits: list[float] = Field(min_length=1)


class PredictionRecord(BaseModel):
    """One line of ``predict`` output."""

    table_id: str
    column_index: int = Field(ge=0)
    label: str
    probabilities: dict[str, float]


class RunManifest(BaseModel):
    """Written next to every command output."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "format_version": 1,
                "command": "train",
                "seed": 0,
                "config": {"family": "gat", "steps": 2},
                "inputs": {"data": "tables.jsonl", "logits": None},
                "outputs": {"model": "model.json"},
                "rng_streams": ["shuffle", "init"],
                "created_at": "2026-01-01T00:00:00+00:00",
            },
        },
    )

    format_version: int = FORMAT_VERSION
    command: str
    seed: int
    config: dict[str, Any] = Field(default_factory=dict)
    inputs: dict[str, str | None] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    rng_streams: list[str] = Field(default_factory=list)
    created_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

