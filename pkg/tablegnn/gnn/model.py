from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..exceptions import InvalidInputError
from ..graph import ColumnGraph, GraphBatch, LabelVocab, as_batch
from ..numerics import ACTIVATIONS, Tensor, identity, softmax_array
from ..run_context import derive_rng
from .config import GnnConfig, GnnFamily
from .layers import GruParams, gat_layer, gcn_layer, ggnn_layer

GnnParams = dict[str, Tensor]

_GRU_GATES = ("z", "r", "h")


def _ggnn_prefix(config: GnnConfig, step: int) -> str:
    return "ggnn.shared" if config.share_weights else f"ggnn.{step}"


def param_shapes(config: GnnConfig, k: int) -> dict[str, tuple[int, ...]]:
    """Name -> shape of every parameter, in a fixed order."""
    width = config.width(k)
    shapes: dict[str, tuple[int, ...]] = {}
    in_dim = k
    for step in range(config.steps):
        final = step == config.steps - 1
        if config.family is GnnFamily.GCN:
            out_dim = k if final else width
            shapes[f"gcn.{step}.W"] = (out_dim, in_dim)
            in_dim = out_dim
        elif config.family is GnnFamily.GAT:
            out_dim = k if final else width
            for head in range(config.heads):
                shapes[f"gat.{step}.{head}.W"] = (out_dim, in_dim)
                shapes[f"gat.{step}.{head}.a"] = (2 * out_dim,)
            in_dim = out_dim if final else out_dim * config.heads
        else:
            prefix = _ggnn_prefix(config, step)
            if f"{prefix}.W" in shapes:
                continue
            shapes[f"{prefix}.W"] = (k, k)
            for gate in _GRU_GATES:
                shapes[f"{prefix}.W_{gate}"] = (k, k)
                shapes[f"{prefix}.U_{gate}"] = (k, k)
                shapes[f"{prefix}.b_{gate}"] = (k,)
    return shapes


def init_params(config: GnnConfig, k: int, seed: int | None = None) -> GnnParams:
    """Glorot-uniform weights and attention vectors, zero biases."""
    if k < 1:
        raise InvalidInputError("k must be positive", details={"k": k})
    rng = derive_rng(config.seed if seed is None else seed, "init")
    params: GnnParams = {}
    for name, shape in param_shapes(config, k).items():
        if name.rsplit(".", 1)[-1].startswith("b_"):
            values = np.zeros(shape)
        else:
            fan_out, fan_in = (shape[0], shape[1]) if len(shape) == 2 else (1, shape[0])
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            values = rng.uniform(-bound, bound, size=shape)
        params[name] = Tensor(values, requires_grad=True, name=name)
    return params


def check_params(params: GnnParams, config: GnnConfig, k: int) -> None:
    expected = param_shapes(config, k)
    if set(expected) != set(params):
        raise InvalidInputError(
            "Parameters do not match the configuration",
            details={
                "missing": sorted(set(expected) - set(params)),
                "unexpected": sorted(set(params) - set(expected)),
            },
        )
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise InvalidInputError(
                f"Parameter {name} has shape {list(params[name].shape)}, expected {list(shape)}",
                details={"name": name},
            )


def _gru(params: GnnParams, prefix: str) -> GruParams:
    return GruParams(**{
        f"{kind}_{gate}": params[f"{prefix}.{kind}_{gate}"]
        for gate in _GRU_GATES
        for kind in ("W", "U", "b")
    })


def model_forward(
    batch: GraphBatch | ColumnGraph,
    params: GnnParams,
    config: GnnConfig,
) -> Tensor:
    """Final node logits h^S, one row per node of the batch."""
    batch = as_batch(batch)
    check_params(params, config, batch.k)
    hidden_activation = ACTIVATIONS[config.activation]
    adjacency = batch.adjacency
    states = Tensor(batch.h0)
    for step in range(config.steps):
        final = step == config.steps - 1
        activation = identity if final else hidden_activation
        if config.family is GnnFamily.GCN:
            states = gcn_layer(states, adjacency, params[f"gcn.{step}.W"], activation)
        elif config.family is GnnFamily.GGNN:
            prefix = _ggnn_prefix(config, step)
            states = ggnn_layer(states, adjacency, params[f"{prefix}.W"], _gru(params, prefix))
        else:
            states = gat_layer(
                states,
                adjacency,
                [params[f"gat.{step}.{h}.W"] for h in range(config.heads)],
                [params[f"gat.{step}.{h}.a"] for h in range(config.heads)],
                activation,
                is_final=final,
            )
    return states


@dataclass(frozen=True)
class ColumnPrediction:
    table_id: str
    column_index: int
    class_index: int
    label: str
    probabilities: np.ndarray


def predict_batch(
    batch: GraphBatch | ColumnGraph,
    params: GnnParams,
    config: GnnConfig,
    vocab: LabelVocab,
) -> list[ColumnPrediction]:
    batch = as_batch(batch)
    logits = model_forward(batch, params, config).data
    probabilities = softmax_array(logits)
    # np.argmax returns the first maximum: ties go to the lowest class index
    classes = np.argmax(logits, axis=1)
    predictions = []
    for node in range(batch.num_nodes):
        table_id, column_index = batch.locate(node)
        predictions.append(
            ColumnPrediction(
                table_id=table_id,
                column_index=column_index,
                class_index=int(classes[node]),
                label=vocab.name(int(classes[node])),
                probabilities=probabilities[node],
            )
        )
    return predictions


def predict(
    graph: ColumnGraph,
    params: GnnParams,
    config: GnnConfig,
    vocab: LabelVocab,
) -> list[ColumnPrediction]:
    """Per-column label and softmax(h^S_u) for one table."""
    return predict_batch(graph, params, config, vocab)


@dataclass
class GnnModel:
    """A configured meta-learner with its parameters and vocabulary."""

    config: GnnConfig
    params: GnnParams
    vocab: LabelVocab

    @classmethod
    def initialize(cls, config: GnnConfig, vocab: LabelVocab, seed: int | None = None) -> GnnModel:
        params = init_params(config, vocab.k, seed)
        logger.debug(
            f"Initialized {config.name} with {sum(p.data.size for p in params.values())} parameters"
        )
        return cls(config, params, vocab)

    @property
    def k(self) -> int:
        return self.vocab.k

    def forward(self, batch: GraphBatch | ColumnGraph) -> Tensor:
        return model_forward(batch, self.params, self.config)

    def predict(self, batch: GraphBatch | ColumnGraph) -> list[ColumnPrediction]:
        return predict_batch(batch, self.params, self.config, self.vocab)
