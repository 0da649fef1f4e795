from __future__ import annotations

from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import ConfigManager
from ..exceptions import ConfigurationError


class GnnFamily(str, Enum):
    GCN = "gcn"
    GGNN = "ggnn"
    GAT = "gat"


class GnnConfig(BaseModel):
    """Architecture of the meta-learner."""

    model_config = ConfigDict(frozen=True)

    family: GnnFamily
    steps: int = Field(ge=1, description="Number of message-passing steps S")
    heads: int = Field(default=1, ge=1, description="Attention heads K (gat only)")
    hidden_dim: int | None = Field(default=None, ge=1, description="Interior width; None means k")
    activation: Literal["relu", "identity"] = "relu"
    share_weights: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def _family_constraints(self) -> GnnConfig:
        if self.family is not GnnFamily.GAT and self.heads != 1:
            raise ValueError("heads applies to gat only and must be 1 otherwise")
        if self.share_weights and self.family is not GnnFamily.GGNN:
            raise ValueError("share_weights applies to ggnn only")
        return self

    def width(self, k: int) -> int:
        """Interior width for output dimension ``k``."""
        if self.family is GnnFamily.GGNN:
            return k
        return self.hidden_dim or k

    @property
    def name(self) -> str:
        if self.family is GnnFamily.GAT:
            return f"{self.family.value}-S{self.steps}-K{self.heads}"
        return f"{self.family.value}-S{self.steps}"

    @classmethod
    def preset(
        cls,
        family: GnnFamily | str,
        config_manager: ConfigManager | None = None,
        **overrides,
    ) -> GnnConfig:
        """Config for ``family`` from the gnn presets, with overrides applied."""
        manager = config_manager or ConfigManager()
        family = GnnFamily(family)
        presets = manager.get_presets("gnn")
        if family.value not in presets:
            raise ConfigurationError(
                f"No preset for family {family.value}",
                details={"available": sorted(presets)},
            )
        base = manager.get_component_config("gnn")
        values = {
            "hidden_dim": base.get("hidden_dim"),
            "activation": base.get("activation", "relu"),
            "share_weights": base.get("share_weights", False) if family is GnnFamily.GGNN else False,
            **presets[family.value],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(family=family, **values)
        except ValueError as e:
            raise ConfigurationError(f"Invalid gnn config: {e}", details={"values": values})
