from .gradcheck import finite_diff_grad, max_relative_error
from .ops import (
    ACTIVATIONS,
    add,
    concat,
    identity,
    log_softmax,
    masked_softmax,
    matmul,
    mean_of,
    mul,
    pick,
    relu,
    reshape,
    scale,
    sigmoid,
    softmax,
    softmax_array,
    sub,
    tanh,
    total,
    transpose,
)
from .optim import AdamState, adam_step
from .tensor import GradTape, Tensor, as_tensor

__all__ = [
    "ACTIVATIONS",
    "AdamState",
    "GradTape",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "concat",
    "finite_diff_grad",
    "identity",
    "log_softmax",
    "masked_softmax",
    "matmul",
    "max_relative_error",
    "mean_of",
    "mul",
    "pick",
    "relu",
    "reshape",
    "scale",
    "sigmoid",
    "softmax",
    "softmax_array",
    "sub",
    "tanh",
    "total",
    "transpose",
]
