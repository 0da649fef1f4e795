"""
Message-passing layers on batched node states.

``states`` is an N×d tensor whose row u is h_u; ``adjacency`` is the N×N
boolean neighbor matrix of a :class:`GraphBatch` (no self-loops). Weight
matrices are stored output-major (out × in), so ``W h_v`` is ``H @ W.T``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError
from ..graph import ColumnGraph, GraphBatch, as_batch
from ..numerics import (
    Tensor,
    add,
    concat,
    identity,
    masked_softmax,
    matmul,
    mean_of,
    mul,
    relu,
    reshape,
    sigmoid,
    sub,
    tanh,
    transpose,
)

Activation = Callable[[Tensor], Tensor]


def _check_weight(states: Tensor, W: Tensor, name: str) -> None:
    if W.ndim != 2 or W.shape[1] != states.shape[1]:
        raise InvalidInputError(
            f"{name} expects input width {states.shape[1]}",
            details={"weight": list(W.shape), "states": list(states.shape)},
        )


def _project(states: Tensor, W: Tensor) -> Tensor:
    return matmul(states, transpose(W))


def gcn_propagation(adjacency: np.ndarray) -> np.ndarray:
    """(A + I) scaled by 1/sqrt(d(u) d(v)) with d = |N(u)| + 1."""
    closed = adjacency | np.eye(adjacency.shape[0], dtype=bool)
    degree = closed.sum(axis=1).astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(degree)
    return closed * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_layer(
    states: Tensor,
    adjacency: np.ndarray,
    W: Tensor,
    activation: Activation = identity,
) -> Tensor:
    """h_u' = σ( Σ_{v ∈ N(u)∪{u}} W h_v / sqrt(d(u) d(v)) )."""
    _check_weight(states, W, "gcn_layer")
    propagation = Tensor(gcn_propagation(adjacency))
    return activation(matmul(propagation, _project(states, W)))


@dataclass(frozen=True)
class GruParams:
    W_z: Tensor
    U_z: Tensor
    b_z: Tensor
    W_r: Tensor
    U_r: Tensor
    b_r: Tensor
    W_h: Tensor
    U_h: Tensor
    b_h: Tensor


def gru_cell(h: Tensor, m: Tensor, gru: GruParams) -> Tensor:
    """z = σ(W_z m + U_z h + b_z), r = σ(W_r m + U_r h + b_r),
    ĥ = tanh(W_h m + U_h (r⊙h) + b_h), h' = (1 − z)⊙h + z⊙ĥ."""
    z = sigmoid(add(add(_project(m, gru.W_z), _project(h, gru.U_z)), gru.b_z))
    r = sigmoid(add(add(_project(m, gru.W_r), _project(h, gru.U_r)), gru.b_r))
    candidate = tanh(add(add(_project(m, gru.W_h), _project(mul(r, h), gru.U_h)), gru.b_h))
    return add(sub(h, mul(z, h)), mul(z, candidate))


def ggnn_layer(states: Tensor, adjacency: np.ndarray, W: Tensor, gru: GruParams) -> Tensor:
    """m_u = Σ_{v ∈ N(u)} W h_v, then h_u' = GRU(h_u, m_u)."""
    _check_weight(states, W, "ggnn_layer")
    if W.shape[0] != states.shape[1]:
        raise InvalidInputError(
            "ggnn_layer keeps the state width; W must be square",
            details={"weight": list(W.shape)},
        )
    neighbor_sum = Tensor(adjacency.astype(np.float64))
    messages = matmul(neighbor_sum, _project(states, W))
    return gru_cell(states, messages, gru)


_SELECT_SOURCE = np.array([[1.0], [0.0]])
_SELECT_TARGET = np.array([[0.0], [1.0]])


def attention_matrix(states: Tensor, adjacency: np.ndarray, W: Tensor, a: Tensor) -> Tensor:
    """α[u, v] over N(u)∪{u}: softmax_v ReLU(aᵀ[W h_u ⊕ W h_v]); zero elsewhere."""
    _check_weight(states, W, "gat attention")
    width = W.shape[0]
    if a.shape != (2 * width,):
        raise InvalidInputError(
            f"Attention vector must have length {2 * width}",
            details={"a": list(a.shape), "weight": list(W.shape)},
        )
    projected = _project(states, W)
    # column 0 scores the node itself, column 1 scores the neighbor
    halves = matmul(projected, transpose(reshape(a, (2, width))))
    own = matmul(halves, Tensor(_SELECT_SOURCE))
    other = transpose(matmul(halves, Tensor(_SELECT_TARGET)))
    scores = relu(add(own, other))
    closed = adjacency | np.eye(adjacency.shape[0], dtype=bool)
    return masked_softmax(scores, closed)


def gat_attention(
    states: Tensor,
    graph: ColumnGraph | GraphBatch,
    u: int,
    W: Tensor,
    a: Tensor,
) -> np.ndarray:
    """Attention weights of node ``u`` over ``graph.closed_neighborhood(u)`` order."""
    batch = as_batch(graph)
    alpha = attention_matrix(states, batch.adjacency, W, a).data
    if isinstance(graph, ColumnGraph):
        order = graph.closed_neighborhood(u)
    else:
        order = (u, *np.flatnonzero(batch.adjacency[u]).tolist())
    return alpha[u, list(order)].copy()


def gat_layer(
    states: Tensor,
    adjacency: np.ndarray,
    weights: Sequence[Tensor],
    attention: Sequence[Tensor],
    activation: Activation = identity,
    is_final: bool = False,
) -> Tensor:
    """Multi-head attention update.

    Non-final: heads concatenated after σ. Final: heads averaged, so the
    output keeps the per-head width.
    """
    if not weights or len(weights) != len(attention):
        raise InvalidInputError(
            "gat_layer needs one attention vector per head",
            details={"weights": len(weights), "attention": len(attention)},
        )
    if len({W.shape for W in weights}) != 1:
        raise InvalidInputError("All heads must share a weight shape")
    head_outputs = [
        matmul(attention_matrix(states, adjacency, W, a), _project(states, W))
        for W, a in zip(weights, attention)
    ]
    if is_final:
        return activation(mean_of(head_outputs))
    return concat([activation(h) for h in head_outputs], axis=1)
