"""
Model file format.

JSON envelope::

    {"format_version": 1, "family": "gat", "S": 2, "K": 4, "hidden_dim": 8, "k": 8,
     "activation": "relu", "share_weights": false, "seed": 0,
     "vocab": [names...],
     "params": {name: {"shape": [...], "data_b64": "..."}}}

``data_b64`` is base64 of IEEE-754 little-endian float64 values in row-major
order, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import base64
import binascii
import json
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import DataFormatError
from ..graph import LabelVocab
from ..numerics import Tensor
from ..schemas import FORMAT_VERSION
from .config import GnnConfig
from .model import GnnModel, check_params


def encode_array(values: np.ndarray) -> dict[str, Any]:
    values = np.ascontiguousarray(values, dtype="<f8")
    return {
        "shape": list(values.shape),
        "data_b64": base64.b64encode(values.tobytes()).decode("ascii"),
    }


def decode_array(entry: dict[str, Any], name: str = "") -> np.ndarray:
    try:
        shape = tuple(int(d) for d in entry["shape"])
        raw = base64.b64decode(entry["data_b64"], validate=True)
    except (KeyError, TypeError, ValueError, binascii.Error) as e:
        raise DataFormatError(f"Malformed array entry {name!r}", details={"error": str(e)})
    values = np.frombuffer(raw, dtype="<f8")
    if values.size != int(np.prod(shape)):
        raise DataFormatError(
            f"Array {name!r} holds {values.size} values for shape {list(shape)}",
            details={"name": name},
        )
    return values.reshape(shape).astype(np.float64)


def model_to_dict(model: GnnModel) -> dict[str, Any]:
    config = model.config
    return {
        "format_version": FORMAT_VERSION,
        "family": config.family.value,
        "S": config.steps,
        "K": config.heads,
        "hidden_dim": config.width(model.k),
        "k": model.k,
        "activation": config.activation,
        "share_weights": config.share_weights,
        "seed": config.seed,
        "vocab": list(model.vocab.names),
        "params": {name: encode_array(p.data) for name, p in model.params.items()},
    }


def model_from_dict(envelope: dict[str, Any]) -> GnnModel:
    if not isinstance(envelope, dict):
        raise DataFormatError(
            "Model envelope must be a JSON object",
            details={"type": type(envelope).__name__},
        )
    if envelope.get("format_version") != FORMAT_VERSION:
        raise DataFormatError(
            "Unsupported model format_version",
            details={"format_version": envelope.get("format_version")},
        )
    try:
        vocab = LabelVocab(envelope["vocab"])
        config = GnnConfig(
            family=envelope["family"],
            steps=envelope["S"],
            heads=envelope["K"],
            hidden_dim=envelope["hidden_dim"],
            activation=envelope.get("activation", "relu"),
            share_weights=envelope.get("share_weights", False),
            seed=envelope.get("seed", 0),
        )
        raw_params = envelope["params"]
    except (KeyError, ValueError) as e:
        raise DataFormatError(f"Malformed model envelope: {e}")
    if not isinstance(raw_params, dict):
        raise DataFormatError("Model params must be a JSON object")
    if envelope.get("k") != vocab.k:
        raise DataFormatError("Model k does not match its vocabulary", details={"k": envelope.get("k")})
    params = {
        name: Tensor(decode_array(entry, name), requires_grad=True, name=name)
        for name, entry in raw_params.items()
    }
    check_params(params, config, vocab.k)
    return GnnModel(config, params, vocab)


def save_model(model: GnnModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(model_to_dict(model), f, indent=2)
        f.write("\n")
    return path


def load_model(path: str | Path) -> GnnModel:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            envelope = json.load(f)
    except FileNotFoundError:
        raise DataFormatError(f"Model file not found: {path}", details={"path": str(path)})
    except json.JSONDecodeError as e:
        raise DataFormatError(
            f"Model file is not valid JSON: {path}",
            details={"path": str(path), "line": e.lineno},
        )
    return model_from_dict(envelope)
