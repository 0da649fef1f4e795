"""
F-scores.

Per-class F1 = 2PR/(P+R), 0 when P+R = 0. The class universe is the union
of gold and predicted labels: macro averages over it, weighted averages by
gold support (classes only predicted weigh 0).
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import precision_recall_fscore_support

from ..exceptions import InvalidInputError
from ..graph import LabelVocab


@dataclass(frozen=True)
class FScores:
    weighted: float
    macro: float
    per_class: dict[str, float]
    support: dict[str, int]


def _as_indices(labels: Sequence, vocab: LabelVocab) -> np.ndarray:
    return np.array(
        [vocab.index(x) if isinstance(x, str) else int(x) for x in labels],
        dtype=np.int64,
    )


def f_scores(predictions: Sequence, golds: Sequence, vocab: LabelVocab) -> FScores:
    """Weighted, macro and per-class F1 for label names or class indices."""
    if len(predictions) != len(golds):
        raise InvalidInputError(
            "Predictions and golds differ in length",
            details={"predictions": len(predictions), "golds": len(golds)},
        )
    if len(golds) == 0:
        return FScores(0.0, 0.0, {}, {})
    pred = _as_indices(predictions, vocab)
    gold = _as_indices(golds, vocab)
    universe = np.union1d(gold, pred)
    _, _, f1, support = precision_recall_fscore_support(
        gold, pred, labels=universe, average=None, zero_division=0
    )
    f1 = np.asarray(f1, dtype=np.float64)
    support = np.asarray(support, dtype=np.int64)
    weighted = float(np.dot(f1, support) / support.sum()) if support.sum() else 0.0
    names = [vocab.name(int(c)) for c in universe]
    return FScores(
        weighted=weighted,
        macro=float(f1.mean()),
        per_class=dict(zip(names, f1.tolist())),
        support=dict(zip(names, support.tolist())),
    )


def subset_macro(per_class: Mapping[str, float], classes: Iterable[str]) -> float | None:
    """Mean F1 over the listed classes that appear in ``per_class``."""
    values = [per_class[c] for c in classes if c in per_class]
    return float(np.mean(values)) if values else None


def subset_weighted(
    per_class: Mapping[str, float],
    support: Mapping[str, int],
    classes: Iterable[str],
) -> float | None:
    """Support-weighted F1 over the listed classes."""
    pairs = [(per_class[c], support.get(c, 0)) for c in classes if c in per_class]
    weight = sum(s for _, s in pairs)
    if not weight:
        return None
    return float(sum(f * s for f, s in pairs) / weight)
