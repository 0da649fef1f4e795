"""Central finite differences, the oracle for tape gradients."""

from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np


def finite_diff_grad(
    loss_fn: Callable,
    params: Mapping[str, np.ndarray] | np.ndarray,
    eps: float = 1e-5,
) -> dict[str, np.ndarray] | np.ndarray:
    """Central-difference gradient of ``loss_fn`` at ``params``.

    ``loss_fn`` receives the same structure it was given (one array, or a
    name -> array mapping) and returns a real number.
    """
    if isinstance(params, Mapping):
        base = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
        grads = {}
        for name, value in base.items():
            grad = np.zeros_like(value)
            for idx in np.ndindex(value.shape):
                probe = dict(base)
                up = value.copy()
                up[idx] += eps
                probe[name] = up
                f_up = float(loss_fn(probe))
                down = value.copy()
                down[idx] -= eps
                probe[name] = down
                f_down = float(loss_fn(probe))
                grad[idx] = (f_up - f_down) / (2.0 * eps)
            grads[name] = grad
        return grads

    value = np.array(params, dtype=np.float64)
    grad = np.zeros_like(value)
    for idx in np.ndindex(value.shape):
        up = value.copy()
        up[idx] += eps
        down = value.copy()
        down[idx] -= eps
        grad[idx] = (float(loss_fn(up)) - float(loss_fn(down))) / (2.0 * eps)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> float:
    """max |a - n| / max(|a|, |n|, floor) over all entries.

    Where both gradients are smaller than ``floor`` this is the absolute
    error divided by ``floor``, so near-zero entries are held to an absolute
    tolerance of ``floor`` times the relative bound.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
