"""
Differentiable operations on :class:`Tensor`.

Each op computes its value with numpy and, when a tape is active, records a
closure mapping the output adjoint to one adjoint per input.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..exceptions import InvalidInputError
from .tensor import Tensor, as_tensor, emit


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise InvalidInputError(
            f"Shapes do not broadcast for {op}",
            details={"left": list(a.shape), "right": list(b.shape)},
        )


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return emit(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return emit(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a, b) -> Tensor:
    """Elementwise (Hadamard) product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    return emit(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def scale(a: Tensor, factor: float) -> Tensor:
    return emit("scale", a.data * factor, (a,), lambda g: (g * factor,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an m×n and an n×p tensor."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise InvalidInputError(
            "matmul needs m×n and n×p operands",
            details={"left": list(a.shape), "right": list(b.shape)},
        )
    return emit(
        "matmul",
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise InvalidInputError("transpose needs a matrix", details={"shape": list(a.shape)})
    return emit("transpose", a.data.T, (a,), lambda g: (g.T,))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise InvalidInputError(
            "Cannot reshape",
            details={"from": list(a.shape), "to": list(shape)},
        )
    return emit("reshape", out, (a,), lambda g: (g.reshape(a.shape),))


def relu(x: Tensor) -> Tensor:
    # subgradient at exactly 0 is 0
    active = x.data > 0
    return emit("relu", np.where(active, x.data, 0.0), (x,), lambda g: (g * active,))


def _sigmoid(values: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(values))
    return np.where(values >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(x: Tensor) -> Tensor:
    s = _sigmoid(x.data)
    return emit("sigmoid", s, (x,), lambda g: (g * s * (1.0 - s),))


def tanh(x: Tensor) -> Tensor:
    t = np.tanh(x.data)
    return emit("tanh", t, (x,), lambda g: (g * (1.0 - t * t),))


def identity(x: Tensor) -> Tensor:
    return x


def _check_nonempty_last_axis(x: Tensor, op: str) -> None:
    if x.ndim == 0 or x.shape[-1] == 0:
        raise InvalidInputError(f"{op} needs at least one entry", details={"shape": list(x.shape)})


def softmax_array(values: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over the last axis (no tape)."""
    shifted = values - values.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(v: Tensor) -> Tensor:
    """Softmax over the last axis of a vector or of each matrix row."""
    _check_nonempty_last_axis(v, "softmax")
    p = softmax_array(v.data)

    def backward(g):
        return (p * (g - (g * p).sum(axis=-1, keepdims=True)),)

    return emit("softmax", p, (v,), backward)


def log_softmax(x: Tensor) -> Tensor:
    _check_nonempty_last_axis(x, "log_softmax")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - lse
    p = np.exp(out)
    return emit(
        "log_softmax",
        out,
        (x,),
        lambda g: (g - p * g.sum(axis=-1, keepdims=True),),
    )


def masked_softmax(scores: Tensor, mask: np.ndarray) -> Tensor:
    """Row softmax over the entries where ``mask`` is true; others are exactly 0.

    Every row must have at least one unmasked entry.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != scores.shape or scores.ndim != 2:
        raise InvalidInputError(
            "Mask must match a 2-D score matrix",
            details={"scores": list(scores.shape), "mask": list(mask.shape)},
        )
    if not mask.any(axis=1).all():
        raise InvalidInputError("Every row needs an unmasked entry")
    masked = np.where(mask, scores.data, -np.inf)
    shifted = np.where(mask, masked - masked.max(axis=1, keepdims=True), -np.inf)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return (p * (g - (g * p).sum(axis=1, keepdims=True)),)

    return emit("masked_softmax", p, (scores,), backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise InvalidInputError("concat of nothing")
    arrays = [t.data for t in tensors]
    try:
        out = np.concatenate(arrays, axis=axis)
    except ValueError as e:
        raise InvalidInputError(
            "Cannot concatenate",
            details={"shapes": [list(a.shape) for a in arrays], "error": str(e)},
        )
    bounds = np.cumsum([a.shape[axis] for a in arrays])[:-1]
    return emit(
        "concat",
        out,
        tuple(tensors),
        lambda g: tuple(np.split(g, bounds, axis=axis)),
    )


def mean_of(tensors: Sequence[Tensor]) -> Tensor:
    """Elementwise mean of equally shaped tensors."""
    if not tensors:
        raise InvalidInputError("mean of nothing")
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise InvalidInputError("mean_of needs equal shapes", details={"shapes": sorted(map(list, shapes))})
    n = len(tensors)
    out = sum(t.data for t in tensors) / n
    return emit("mean_of", out, tuple(tensors), lambda g: tuple(g / n for _ in range(n)))


def total(x: Tensor) -> Tensor:
    """Sum of all entries, as a scalar tensor."""
    return emit("total", np.array(x.data.sum()), (x,), lambda g: (np.full(x.shape, float(g)),))


def pick(x: Tensor, indices: np.ndarray) -> Tensor:
    """``x[i, indices[i]]`` for every row i."""
    indices = np.asarray(indices, dtype=np.int64)
    if x.ndim != 2 or indices.shape != (x.shape[0],):
        raise InvalidInputError(
            "pick needs one index per row",
            details={"shape": list(x.shape), "indices": list(indices.shape)},
        )
    rows = np.arange(x.shape[0])

    def backward(g):
        grad = np.zeros(x.shape)
        grad[rows, indices] = g
        return (grad,)

    return emit("pick", x.data[rows, indices], (x,), backward)


ACTIVATIONS = {
    "relu": relu,
    "identity": identity,
    "sigmoid": sigmoid,
    "tanh": tanh,
}
