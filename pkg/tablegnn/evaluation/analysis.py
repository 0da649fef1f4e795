"""Breakdowns of test predictions by class frequency and by table width."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from ..exceptions import InvalidInputError
from ..graph import LabelVocab
from .metrics import FScores, f_scores

BIN_NAMES = {3: ("High", "Medium", "Low")}


@dataclass(frozen=True)
class ColumnOutcome:
    table_id: str
    column_index: int
    num_columns: int
    gold: str
    predicted: str


def bin_names(bins: int) -> tuple[str, ...]:
    return BIN_NAMES.get(bins, tuple(f"bin{i + 1}" for i in range(bins)))


def frequency_bins(
    labels: Iterable[str],
    bins: int = 3,
    vocab: LabelVocab | None = None,
) -> dict[str, str]:
    """Assign each class to one of ``bins`` equal-size frequency bins.

    Classes are sorted by descending count, ties broken by class index
    (vocabulary order, or name without a vocabulary), then cut into
    contiguous groups. Remainders go to the earlier bins.
    """
    counts = Counter(labels)
    if not counts:
        raise InvalidInputError("Frequency bins need at least one label")
    if bins < 1:
        raise InvalidInputError("Need at least one bin", details={"bins": bins})

    def tie_key(name: str):
        return vocab.index(name) if vocab is not None else name

    ordered = sorted(counts, key=lambda c: (-counts[c], tie_key(c)))
    base, extra = divmod(len(ordered), bins)
    names = bin_names(bins)
    assignment: dict[str, str] = {}
    start = 0
    for b in range(bins):
        size = base + (1 if b < extra else 0)
        for cls in ordered[start : start + size]:
            assignment[cls] = names[b]
        start += size
    return assignment


def column_count_key(n: int, cap: int | None = None) -> str:
    if cap is not None and n >= cap:
        return f"{cap}+"
    return str(n)


def breakdown_by_column_count(
    outcomes: Sequence[ColumnOutcome],
    vocab: LabelVocab,
    cap: int | None = None,
) -> dict[str, FScores]:
    """Scores over columns of tables with exactly n columns, per observed n."""
    groups: dict[int, list[ColumnOutcome]] = {}
    for outcome in outcomes:
        groups.setdefault(outcome.num_columns, []).append(outcome)

    merged: dict[str, list[ColumnOutcome]] = {}
    for n in sorted(groups):
        merged.setdefault(column_count_key(n, cap), []).extend(groups[n])
    return {
        key: f_scores([o.predicted for o in rows], [o.gold for o in rows], vocab)
        for key, rows in merged.items()
    }
