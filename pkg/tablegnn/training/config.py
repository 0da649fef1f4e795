from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..config import ConfigManager
from ..exceptions import ConfigurationError
from ..gnn import GnnFamily


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=1e-3, ge=0.0)
    weight_decay: float = Field(default=5e-4, ge=0.0)
    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=32, ge=1)
    seed: int = 0
    grid_heads: tuple[int, ...] = (1, 2, 4, 8, 12)
    grid_steps: tuple[int, ...] = (1, 2, 3, 4)

    @field_validator("grid_heads", "grid_steps")
    @classmethod
    def _positive_grid(cls, values: tuple[int, ...]) -> tuple[int, ...]:
        if any(v < 1 for v in values):
            raise ValueError("grid values must be positive")
        return tuple(values)

    @classmethod
    def for_family(
        cls,
        family: GnnFamily | str,
        config_manager: ConfigManager | None = None,
        **overrides,
    ) -> TrainConfig:
        """Training config with the family's epoch preset and the component defaults."""
        manager = config_manager or ConfigManager()
        family = GnnFamily(family)
        values = manager.get_component_config("training", overrides)
        epochs = manager.get_presets("training").get("epochs", {})
        if overrides.get("epochs") is None:
            values["epochs"] = epochs.get(family.value, 100)
        try:
            return cls(**values)
        except ValueError as e:
            raise ConfigurationError(f"Invalid training config: {e}", details={"values": values})
