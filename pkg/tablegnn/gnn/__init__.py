from .config import GnnConfig, GnnFamily
from .layers import (
    GruParams,
    attention_matrix,
    gat_attention,
    gat_layer,
    gcn_layer,
    gcn_propagation,
    ggnn_layer,
    gru_cell,
)
from .model import (
    ColumnPrediction,
    GnnModel,
    GnnParams,
    check_params,
    init_params,
    model_forward,
    param_shapes,
    predict,
    predict_batch,
)
from .serialization import decode_array, encode_array, load_model, save_model

__all__ = [
    "ColumnPrediction",
    "GnnConfig",
    "GnnFamily",
    "GnnModel",
    "GnnParams",
    "GruParams",
    "attention_matrix",
    "check_params",
    "decode_array",
    "encode_array",
    "gat_attention",
    "gat_layer",
    "gcn_layer",
    "gcn_propagation",
    "ggnn_layer",
    "gru_cell",
    "init_params",
    "load_model",
    "model_forward",
    "param_shapes",
    "predict",
    "predict_batch",
    "save_model",
]
