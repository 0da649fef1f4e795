from __future__ import annotations

import numpy as np

from ..exceptions import InvalidInputError
from ..numerics import Tensor, log_softmax, pick, scale, total


def nll_loss(final_states: Tensor, gold) -> Tensor:
    """Σ_u −log softmax(h^S_u)[class_u], via max-subtracted log-sum-exp."""
    gold = np.asarray(gold, dtype=np.int64)
    if final_states.ndim != 2 or gold.shape != (final_states.shape[0],):
        raise InvalidInputError(
            "nll_loss needs one gold index per node",
            details={"states": list(final_states.shape), "gold": list(gold.shape)},
        )
    k = final_states.shape[1]
    if gold.size and (gold.min() < 0 or gold.max() >= k):
        raise InvalidInputError(
            "Gold class index out of range",
            details={"k": k, "min": int(gold.min()), "max": int(gold.max())},
        )
    return scale(total(pick(log_softmax(final_states), gold)), -1.0)
