from __future__ import annotations

"""
Configuration loader for Doctrina.

Loads configuration.yaml and merges it over the built-in budget defaults.
"""

import copy
import logging
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

DEFAULTS: dict[str, dict[str, Any]] = {
    "types": {"ceiling": 1_000_000},
    "rewrite": {
        "eta_depth": 4,
        "node_budget": 10_000,
        "fuel": 5_000,
        "strategy": "outermost",
    },
    "search": {"max_depth": 6, "max_cut_depth": 1, "max_nodes": 20_000},
    "enumeration": {"hom_size": 8, "max_derivations": 200_000},
    "probe": {"expansion_bound": 2, "node_bound": 4},
    "closure": {"trials": 2_000, "seed": 1729, "exhaustive_length": 5},
    "app": {"log_level": "WARNING", "report_format": "text"},
}

# Workspace `set` directive names and the section each one lives in
DIRECTIVES: dict[str, str] = {
    "ceiling": "types",
    "eta_depth": "rewrite",
    "node_budget": "rewrite",
    "fuel": "rewrite",
    "max_depth": "search",
    "max_cut_depth": "search",
    "max_nodes": "search",
    "hom_size": "enumeration",
    "max_derivations": "enumeration",
    "expansion_bound": "probe",
    "node_bound": "probe",
    "trials": "closure",
    "seed": "closure",
    "exhaustive_length": "closure",
}


class ConfigurationError(Exception):
    """Raised when there's an issue with configuration."""

    pass


def _find_project_root() -> Path:
    """Find the project root by looking for configuration.yaml."""
    current = Path(__file__).parent
    for _ in range(5):
        if (current / "configuration.yaml").exists():
            return current
        current = current.parent

    cwd = Path.cwd()
    if (cwd / "configuration.yaml").exists():
        return cwd

    raise ConfigurationError(
        "Could not find configuration.yaml. "
        "Ensure you're running from the project directory."
    )


class Config:
    """Engine budgets and application settings."""

    def __init__(self, config_path: str | Path | None = None, *, use_file: bool = True):
        """
        Initialize configuration.

        Args:
            config_path: Path to configuration.yaml (default: project root)
            use_file: When False, skip the file and use built-in defaults only
        """
        self.config = copy.deepcopy(DEFAULTS)
        self.config_path: Path | None = None

        if not use_file:
            return

        if config_path is None:
            config_path = _find_project_root() / "configuration.yaml"
        self.config_path = Path(config_path)
        self._merge(self._load_yaml(self.config_path))

    def _load_yaml(self, path: Path) -> dict[str, Any]:
        """Load YAML file."""
        import yaml

        if not path.exists():
            raise ConfigurationError(f"Configuration file not found: {path}")

        with open(path) as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Error parsing {path}: {e}")

        if not isinstance(data, dict):
            raise ConfigurationError(f"Top level of {path} must be a mapping")
        return data

    def _merge(self, data: dict[str, Any]) -> None:
        for section, values in data.items():
            if section not in DEFAULTS:
                logger.warning(f"Ignoring unknown configuration section '{section}'")
                continue
            if not isinstance(values, dict):
                raise ConfigurationError(f"Section '{section}' must be a mapping")
            for key, value in values.items():
                if key not in DEFAULTS[section]:
                    logger.warning(f"Ignoring unknown setting '{section}.{key}'")
                    continue
                self.config[section][key] = value

    def get_section(self, section: str) -> dict[str, Any]:
        """Get a copy of one configuration section."""
        if section not in self.config:
            raise ConfigurationError(
                f"Section '{section}' not found in configuration. "
                f"Available: {list(self.config.keys())}"
            )
        return dict(self.config[section])

    def get_budget(self, section: str, key: str, default: Any = None) -> Any:
        """Get a single budget value."""
        return self.config.get(section, {}).get(key, default)

    def get_app_setting(self, key: str, default: Any = None) -> Any:
        """Get application setting."""
        return self.config.get("app", {}).get(key, default)

    def apply_directives(self, directives: dict[str, int]) -> Config:
        """
        Return a copy with workspace `set` directives applied.

        Args:
            directives: Mapping of directive name to value

        Returns:
            New Config object
        """
        updated = Config(use_file=False)
        updated.config = copy.deepcopy(self.config)
        updated.config_path = self.config_path
        for name, value in directives.items():
            section = DIRECTIVES.get(name)
            if section is None:
                raise ConfigurationError(
                    f"Unknown directive '{name}'. Available: {sorted(DIRECTIVES)}"
                )
            updated.config[section][name] = value
        return updated

    def search_budget(self):
        """Build the proof-search budget."""
        from doctrina.search import SearchBudget

        section = self.config["search"]
        return SearchBudget(
            max_depth=int(section["max_depth"]),
            max_cut_depth=int(section["max_cut_depth"]),
            max_nodes=int(section["max_nodes"]),
        )

    def equality_budget(self) -> dict[str, Any]:
        """Keyword arguments for rewrite.equal."""
        section = self.config["rewrite"]
        return {
            "depth": int(section["eta_depth"]),
            "budget": int(section["node_budget"]),
            "fuel": int(section["fuel"]),
        }

    def enumeration_limits(self) -> dict[str, int]:
        section = self.config["enumeration"]
        return {
            "hom_size": int(section["hom_size"]),
            "max_derivations": int(section["max_derivations"]),
        }

    def probe_limits(self) -> dict[str, int]:
        section = self.config["probe"]
        return {
            "bound": int(section["expansion_bound"]),
            "node_bound": int(section["node_bound"]),
        }

    def closure_settings(self) -> dict[str, int]:
        section = self.config["closure"]
        return {
            "trials": int(section["trials"]),
            "seed": int(section["seed"]),
            "exhaustive_length": int(section["exhaustive_length"]),
        }

    def __repr__(self):
        return f"Config(path='{self.config_path}', sections={list(self.config)})"


def load_config(config_path: str | Path | None = None) -> Config:
    """
    Load configuration.

    Args:
        config_path: Path to configuration.yaml (default: auto-detect)

    Returns:
        Config object
    """
    return Config(config_path)


def load_config_or_defaults(config_path: str | Path | None = None) -> Config:
    """Load configuration, falling back to defaults when no file is found."""
    if config_path is not None:
        return Config(config_path)
    try:
        return Config()
    except ConfigurationError as e:
        logger.warning(f"{e} Using built-in defaults.")
        return Config(use_file=False)
