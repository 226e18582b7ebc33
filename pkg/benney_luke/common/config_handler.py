import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Dict, Optional
import yaml
from pydantic import ValidationError
from benney_luke.common.logging_config import internal_logger, initialize_handlers
from benney_luke.common.error import BLError, Code
from benney_luke.common.models import ExperimentConfig

THREADS_ENV = "BL_THREADS"


def _merge_dicts(d1: Mapping, d2: Mapping) -> Dict[str, Any]:
    merged = dict(d1)
    for key, value in d2.items():
        if (
            isinstance(value, Mapping)
            and key in merged
            and isinstance(merged[key], Mapping)
        ):
            merged[key] = _merge_dicts(dict(merged[key]), dict(value))
        else:
            merged[key] = value
    return merged


def deep_merge(base: ExperimentConfig | Mapping, override: ExperimentConfig | Mapping) -> ExperimentConfig:
    """
    Recursively merge two configurations, giving priority to ``override``.
    Plain mappings may hold only the keys being overridden.
    """
    d1 = base.model_dump() if isinstance(base, ExperimentConfig) else dict(base)
    d2 = override.model_dump(exclude_unset=True) if isinstance(override, ExperimentConfig) else dict(override)
    return build_config(_merge_dicts(d1, d2))


def build_config(data: Mapping) -> ExperimentConfig:
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise BLError(Code.E0601, message=f"Invalid configuration: {e.errors()[0]['msg']}",
                      details=e.errors(include_url=False, include_context=False), cause=e) from e


def resolve_threads(cli_threads: Optional[int], file_threads: int) -> int:
    """CLI value wins over BL_THREADS, which wins over the file."""
    if cli_threads is not None:
        return int(cli_threads)
    env_value = os.environ.get(THREADS_ENV)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError as e:
            raise BLError(Code.E0601, message=f"{THREADS_ENV} must be an integer, got '{env_value}'") from e
    return file_threads


class ConfigHandler:
    """Loads, layers and saves experiment configurations as YAML."""

    def __init__(self, config: Optional[ExperimentConfig] = None):
        self.config: ExperimentConfig = config or ExperimentConfig()
        self.source_path: Optional[Path] = None

    def load(self, path: Optional[str | Path] = None, overrides: Optional[Mapping] = None,
             cli_threads: Optional[int] = None) -> ExperimentConfig:
        """
        Layer built-in defaults, the YAML file at ``path`` and ``overrides``.
        Configures logging from the merged result.
        """
        merged = self.config
        if path is not None:
            self.source_path = Path(path)
            merged = deep_merge(merged, self._load_yaml(self.source_path))
        if overrides:
            merged = deep_merge(merged, overrides)
        threads = resolve_threads(cli_threads, merged.threads)
        if threads != merged.threads:
            merged = deep_merge(merged, {"threads": threads})
        self.config = merged
        initialize_handlers(self.config)
        internal_logger.debug(f"Configuration loaded (source: {self.source_path or 'defaults'})")
        return self.config

    def update_config(self, new_config: Mapping | ExperimentConfig) -> ExperimentConfig:
        if not isinstance(new_config, (Mapping, ExperimentConfig)):
            raise BLError(Code.E0601, message="new_config must be a mapping or ExperimentConfig")
        self.config = deep_merge(self.config, new_config)
        return self.config

    @staticmethod
    def _load_yaml(path: Path) -> Dict[str, Any]:
        if not path.exists():
            raise BLError(Code.E0601, message=f"Configuration file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise BLError(Code.E0602, message=f"Error parsing YAML file {path}: {e}", cause=e) from e
        except OSError as e:
            raise BLError(Code.E0605, message=f"Cannot read {path}: {e}", cause=e) from e
        if not isinstance(data, Mapping):
            raise BLError(Code.E0602, message=f"Top level of {path} must be a mapping")
        return dict(data)

    @staticmethod
    def save(config: ExperimentConfig, path: str | Path, extra: Optional[Mapping] = None) -> Path:
        """Write ``config`` (and optional extra sections) as a YAML manifest."""
        target = Path(path)
        payload = config.model_dump(mode="json")
        if extra:
            payload = _merge_dicts(payload, extra)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as f:
                yaml.safe_dump(payload, f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            raise BLError(Code.E0605, message=f"Cannot write {target}: {e}", cause=e) from e
        return target
