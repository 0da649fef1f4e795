from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from ..config import ConfigManager
from ..exceptions import ConfigurationError
from ..gnn import GnnConfig, GnnFamily
from ..training import TrainConfig


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    folds: int = Field(default=5, ge=2)
    val_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    bins: int = Field(default=3, ge=1)
    column_count_cap: int | None = Field(default=None, ge=2)
    configs: str = "gat,gcn,ggnn"
    synthetic_tables: int = Field(default=200, ge=20)

    @classmethod
    def load(cls, config_manager: ConfigManager | None = None, **overrides) -> EvaluationConfig:
        manager = config_manager or ConfigManager()
        values = manager.get_component_config("evaluation", overrides)
        try:
            return cls(**values)
        except ValueError as e:
            raise ConfigurationError(f"Invalid evaluation config: {e}", details={"values": values})


def parse_config_specs(specs: str) -> list[tuple[GnnFamily, int | None, int | None]]:
    """Parse ``family[:steps[:heads]]`` entries separated by commas."""
    parsed = []
    for raw in specs.split(","):
        raw = raw.strip()
        if not raw:
            continue
        parts = raw.split(":")
        if len(parts) > 3:
            raise ConfigurationError(f"Invalid config spec: {raw!r}")
        try:
            family = GnnFamily(parts[0].lower())
            steps = int(parts[1]) if len(parts) > 1 else None
            heads = int(parts[2]) if len(parts) > 2 else None
        except ValueError:
            raise ConfigurationError(
                f"Invalid config spec: {raw!r}",
                details={"expected": "family[:steps[:heads]]", "families": [f.value for f in GnnFamily]},
            )
        parsed.append((family, steps, heads))
    if not parsed:
        raise ConfigurationError("No configs given")
    return parsed


def resolve_configs(
    specs: str,
    config_manager: ConfigManager | None = None,
    seed: int = 0,
    **train_overrides,
) -> list[tuple[GnnConfig, TrainConfig]]:
    """Preset-based model and training configs for each spec entry."""
    manager = config_manager or ConfigManager()
    resolved = []
    for family, steps, heads in parse_config_specs(specs):
        gnn_config = GnnConfig.preset(family, manager, steps=steps, heads=heads, seed=seed)
        train_config = TrainConfig.for_family(family, manager, seed=seed, **train_overrides)
        resolved.append((gnn_config, train_config))
    return resolved
