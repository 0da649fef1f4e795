"""
Component configuration manager

Manages configuration for tablegnn components:
1. Reads defaults from the component's config.yaml (config_requirements)
2. Overlays the matching section of an optional user YAML file
3. Overlays explicit overrides (CLI flags)
"""

from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from ..exceptions import ConfigurationError

PACKAGE_DIR = Path(__file__).resolve().parent.parent


class ConfigManager:
    """Resolves component configs from defaults, a user file and overrides."""

    def __init__(self, user_config_path: str | Path | None = None):
        """
        Args:
            user_config_path: optional YAML file with one section per component
        """
        self.user_config_path = Path(user_config_path) if user_config_path else None
        self._user_config = self._load_user_config()

    def _load_user_config(self) -> dict:
        if self.user_config_path is None:
            return {}
        if not self.user_config_path.exists():
            raise ConfigurationError(
                f"Config file not found: {self.user_config_path}",
                details={"config_path": str(self.user_config_path)},
            )
        try:
            with open(self.user_config_path, encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(
                "Invalid YAML in config file",
                details={"config_path": str(self.user_config_path), "yaml_error": str(e)},
            )
        if not isinstance(config, dict):
            raise ConfigurationError(
                "Config file must hold a mapping of component sections",
                details={"config_path": str(self.user_config_path)},
            )
        logger.info(f"Loaded user config from {self.user_config_path}")
        return config

    def _load_component_yaml(self, component: str) -> dict:
        """
        Load a component's config.yaml

        Args:
            component: subpackage name, e.g. 'training'
        """
        yaml_path = PACKAGE_DIR / component / "config.yaml"
        if not yaml_path.exists():
            logger.warning(f"Component config.yaml not found: {yaml_path}")
            return {}
        try:
            with open(yaml_path, encoding="utf-8") as f:
                return yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Invalid YAML in config file for component {component}",
                details={"config_path": str(yaml_path), "yaml_error": str(e)},
            )

    @staticmethod
    def _defaults_from_requirements(config_requirements: dict) -> dict:
        type_defaults = {
            "string": "",
            "str": "",
            "int": 0,
            "float": 0.0,
            "bool": False,
            "list": [],
            "dict": {},
        }
        defaults = {}
        for key, value in config_requirements.items():
            if isinstance(value, dict):
                if "default" in value:
                    defaults[key] = value["default"]
                elif "type" in value:
                    defaults[key] = type_defaults.get(value["type"].lower(), "")
                else:
                    defaults[key] = value
            else:
                defaults[key] = value
        return defaults

    def get_component_config(
        self,
        component: str,
        overrides: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """
        Resolved configuration for a component.

        Args:
            component: subpackage name
            overrides: values that win over file and defaults; None entries are ignored

        Returns:
            flat dict of config values
        """
        component_yaml = self._load_component_yaml(component)
        resolved = self._defaults_from_requirements(
            component_yaml.get("config_requirements", {})
        )

        section = self._user_config.get(component, {}) or {}
        unknown = sorted(set(section) - set(resolved))
        if unknown:
            logger.warning(f"Ignoring unknown config keys for '{component}': {unknown}")
        resolved.update({k: v for k, v in section.items() if k in resolved})

        for key, value in (overrides or {}).items():
            if value is not None:
                resolved[key] = value
        return resolved

    def get_presets(self, component: str) -> dict[str, Any]:
        """The ``presets`` block of a component config.yaml."""
        return self._load_component_yaml(component).get("presets", {})
