from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from sklearn.model_selection import KFold, train_test_split

from ..exceptions import InvalidInputError, InvariantViolation
from ..graph import Table


@dataclass(frozen=True)
class Fold:
    index: int
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def check_disjoint(self) -> None:
        train, val, test = set(self.train_ids), set(self.val_ids), set(self.test_ids)
        if train & test or val & test or train & val:
            raise InvariantViolation(
                f"Fold {self.index} splits overlap",
                details={
                    "train_test": sorted(train & test),
                    "val_test": sorted(val & test),
                    "train_val": sorted(train & val),
                },
            )


def kfold_split(
    tables: Sequence[Table],
    k: int = 5,
    seed: int = 0,
    val_fraction: float = 0.2,
) -> list[Fold]:
    """Split tables (never columns) into k test folds.

    Each fold's remaining tables are split again: ceil(val_fraction * n) go
    to validation, so training keeps floor((1 - val_fraction) * n). With
    fewer than two remaining tables there is no validation split.
    """
    if k < 2:
        raise InvalidInputError("Need at least two folds", details={"folds": k})
    if len(tables) < k:
        raise InvalidInputError(
            f"{len(tables)} tables cannot fill {k} folds",
            details={"tables": len(tables), "folds": k},
        )
    ids = np.array([t.table_id for t in tables], dtype=object)
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    folds = []
    for index, (rest_idx, test_idx) in enumerate(splitter.split(ids)):
        rest = ids[rest_idx]
        if len(rest) >= 2 and val_fraction > 0:
            train, val = train_test_split(rest, test_size=val_fraction, random_state=seed + index)
        else:
            train, val = rest, np.array([], dtype=object)
        fold = Fold(index, tuple(train), tuple(val), tuple(ids[test_idx]))
        fold.check_disjoint()
        folds.append(fold)
    return folds
