"""
Immutable float64 tensors and the gradient tape.

Operations in :mod:`tablegnn.numerics.ops` record themselves on the active
:class:`GradTape` whenever one of their inputs requires a gradient. The tape
is dynamic: a new one is opened for every forward pass.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError, InvariantViolation

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tensor:
    """Row-major float64 array that never changes after construction."""

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        array = np.array(data, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise InvariantViolation(
                "Non-finite value produced",
                details={"tensor": name, "shape": list(array.shape)},
            )
        array.setflags(write=False)
        self.data = array
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        return float(self.data.item())

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>"

    # operator sugar; the implementations live in ops
    def __add__(self, other):
        from .ops import add

        return add(self, other)

    def __sub__(self, other):
        from .ops import sub

        return sub(self, other)

    def __mul__(self, other):
        from .ops import mul

        return mul(self, other)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)

    @property
    def T(self):
        from .ops import transpose

        return transpose(self)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


@dataclass(slots=True)
class TapeRecord:
    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn


_active_tape: ContextVar[GradTape | None] = ContextVar("active_tape", default=None)


class GradTape:
    """Records operations in execution order and replays them backwards."""

    def __init__(self):
        self.records: list[TapeRecord] = []
        self._token = None

    def __enter__(self) -> GradTape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc_info) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def record(self, op: str, output: Tensor, inputs: tuple[Tensor, ...], backward: BackwardFn):
        self.records.append(TapeRecord(op, output, inputs, backward))

    def gradient(
        self,
        loss: Tensor,
        sources: Mapping[str, Tensor] | Sequence[Tensor],
    ) -> dict[str, np.ndarray] | list[np.ndarray]:
        """Adjoints of ``loss`` with respect to ``sources``.

        Sources the loss does not depend on get zero gradients.
        """
        if loss.data.size != 1:
            raise InvalidInputError(
                "Gradient requires a scalar loss",
                details={"shape": list(loss.shape)},
            )
        adjoints: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for rec in reversed(self.records):
            upstream = adjoints.get(id(rec.output))
            if upstream is None:
                continue
            for tensor, grad in zip(rec.inputs, rec.backward(upstream)):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + grad
                else:
                    adjoints[key] = np.array(grad, dtype=np.float64)

        def adjoint_of(tensor: Tensor) -> np.ndarray:
            grad = adjoints.get(id(tensor))
            return np.zeros_like(tensor.data) if grad is None else grad.reshape(tensor.shape)

        if isinstance(sources, Mapping):
            return {name: adjoint_of(t) for name, t in sources.items()}
        return [adjoint_of(t) for t in sources]


def active_tape() -> GradTape | None:
    return _active_tape.get()


def emit(op: str, data: np.ndarray, inputs: tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    """Wrap an op result and record it when any input is tracked."""
    tape = _active_tape.get()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=tracked)
    if tracked:
        tape.record(op, out, inputs, backward)
    return out
