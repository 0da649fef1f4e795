from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidInputError
from .tensor import Tensor


@dataclass
class AdamState:
    """Adam moments per parameter name plus the shared step counter."""

    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Mapping[str, Tensor]) -> AdamState:
        return cls(
            first_moment={name: np.zeros(p.shape) for name, p in params.items()},
            second_moment={name: np.zeros(p.shape) for name, p in params.items()},
        )


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float,
) -> dict[str, Tensor]:
    """One Adam update with bias correction.

    Weight decay is an L2 term added to the gradient before the moment
    updates (not decoupled). ``state`` is advanced in place; new parameter
    tensors are returned.
    """
    if set(params) != set(grads) or set(params) != set(state.first_moment):
        raise InvalidInputError(
            "Parameter, gradient and optimizer state names differ",
            details={
                "params": sorted(params),
                "grads": sorted(grads),
                "state": sorted(state.first_moment),
            },
        )
    for name, p in params.items():
        if grads[name].shape != p.shape or state.first_moment[name].shape != p.shape:
            raise InvalidInputError(
                f"Shape mismatch for parameter {name}",
                details={
                    "param": list(p.shape),
                    "grad": list(grads[name].shape),
                    "state": list(state.first_moment[name].shape),
                },
            )

    state.step += 1
    t = state.step
    bias1 = 1.0 - state.beta1**t
    bias2 = 1.0 - state.beta2**t

    updated = {}
    for name, p in params.items():
        g = grads[name] + weight_decay * p.data
        m = state.beta1 * state.first_moment[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.second_moment[name] + (1.0 - state.beta2) * g * g
        state.first_moment[name] = m
        state.second_moment[name] = v
        m_hat = m / bias1
        v_hat = v / bias2
        updated[name] = Tensor(
            p.data - lr * m_hat / (np.sqrt(v_hat) + state.eps),
            requires_grad=True,
            name=name,
        )
    return updated
