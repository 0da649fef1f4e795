"""
Tables, the label vocabulary and the dataset JSONL format.

Dataset file: UTF-8 JSON Lines, one table per line::

    {"table_id": str, "columns": [{"values": [str, ...], "label": str | null}, ...]}

Column order in the array is authoritative.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from loguru import logger
from pydantic import ValidationError as PydanticValidationError

from ..exceptions import DataFormatError, InvalidInputError, VocabularyError
from ..schemas import ColumnRecord, TableRecord


@dataclass(frozen=True, slots=True)
class Column:
    values: tuple[str, ...]
    gold_label: str | None = None


@dataclass(frozen=True, slots=True)
class Table:
    table_id: str
    columns: tuple[Column, ...]

    def __post_init__(self):
        if not self.columns:
            raise InvalidInputError(
                "A table needs at least one column",
                details={"table_id": self.table_id},
            )

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    @property
    def labels(self) -> list[str | None]:
        return [c.gold_label for c in self.columns]

    def is_fully_labeled(self) -> bool:
        return all(c.gold_label is not None for c in self.columns)

    @classmethod
    def from_record(cls, record: TableRecord) -> Table:
        return cls(
            table_id=record.table_id,
            columns=tuple(Column(tuple(c.values), c.label) for c in record.columns),
        )

    def to_record(self) -> TableRecord:
        return TableRecord(
            table_id=self.table_id,
            columns=[ColumnRecord(values=list(c.values), label=c.gold_label) for c in self.columns],
        )


class LabelVocab:
    """Bijection between semantic-type names and indices 0..k-1."""

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise InvalidInputError("Duplicate label names in vocabulary", details={"names": list(names)})
        if not names:
            raise InvalidInputError("Empty vocabulary")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    @classmethod
    def from_tables(cls, tables: Iterable[Table]) -> LabelVocab:
        """Sorted set of every gold label in ``tables``."""
        labels = {c.gold_label for t in tables for c in t.columns if c.gold_label is not None}
        return cls(sorted(labels))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelVocab) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"LabelVocab({list(self.names)})"

    @property
    def k(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise VocabularyError(f"Unknown label: {name!r}", details={"label": name})

    def name(self, index: int) -> str:
        if not 0 <= index < len(self.names):
            raise InvalidInputError(f"Class index out of range: {index}", details={"k": self.k})
        return self.names[index]


def load_tables(path: str | Path) -> list[Table]:
    """Parse a dataset JSONL file; errors cite the 1-based line number."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"Dataset file not found: {path}", details={"path": str(path)})
    tables: list[Table] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = TableRecord.model_validate_json(line)
            except PydanticValidationError as e:
                raise DataFormatError(
                    f"Invalid table record at line {line_no}",
                    details={"path": str(path), "line": line_no, "error": e.errors(include_url=False)},
                )
            if record.table_id in seen:
                raise DataFormatError(
                    f"Duplicate table_id {record.table_id!r} at line {line_no}",
                    details={"path": str(path), "line": line_no, "first_line": seen[record.table_id]},
                )
            seen[record.table_id] = line_no
            tables.append(Table.from_record(record))
    logger.debug(f"Loaded {len(tables)} tables from {path}")
    return tables


def save_tables(tables: Iterable[Table], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for table in tables:
            f.write(json.dumps(table.to_record().model_dump(), ensure_ascii=False) + "\n")
            count += 1
    return count
