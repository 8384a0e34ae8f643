from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from services.common.errors import InvalidInputError

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent.parent

DEFAULT_CONFIG_PATH = BASE_DIR / "config" / "octet.conf"

MEM_BUDGET_ENV = "OCTET_MEM_BUDGET_MB"

# 可配置键及其类型
CONFIG_KEYS: Dict[str, type] = {
    "mem_budget_mb": int,
    "threads": int,
    "dedup_depth": int,
    "executor": str,
    "search_budget": int,
    "reduction_cap": int,
    "geometry_max_depth": int,
    "log_level": str,
}


def load_config_file(path: str | Path) -> Dict[str, str]:
    """读取扁平的 key=value 配置文件，忽略空行与 # 注释。"""
    config_path = Path(path)
    if not config_path.exists():
        raise InvalidInputError(f"config file not found: {config_path}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(config_path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise InvalidInputError(f"{config_path}:{lineno}: expected key=value, got {raw!r}")
        if key not in CONFIG_KEYS:
            raise InvalidInputError(f"{config_path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _coerce(key: str, value: Any) -> Any:
    kind = CONFIG_KEYS[key]
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"config key {key!r} expects {kind.__name__}, got {value!r}") from exc


class Settings:
    """Runtime configuration."""

    mem_budget_mb: int = 256
    threads: int = 1
    dedup_depth: int = 4
    executor: str = "thread"
    search_budget: int = 2_000_000
    reduction_cap: int = 1_000_000
    geometry_max_depth: int = 6
    log_level: str = "INFO"

    def __init__(self, **overrides: Any) -> None:
        env_budget = os.getenv(MEM_BUDGET_ENV)
        if env_budget:
            self.mem_budget_mb = _coerce("mem_budget_mb", env_budget)
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise InvalidInputError(f"unknown setting {key!r}")
            setattr(self, key, _coerce(key, value))

    @property
    def mem_budget_bytes(self) -> int:
        return self.mem_budget_mb * 1024 * 1024

    def as_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in CONFIG_KEYS}

    def update(self, values: Mapping[str, Any]) -> None:
        """就地覆盖配置，供入口在合并后同步到模块级 settings。"""
        for key, value in values.items():
            if key not in CONFIG_KEYS:
                raise InvalidInputError(f"unknown setting {key!r}")
            setattr(self, key, _coerce(key, value))

    def merged(
        self,
        file_values: Optional[Mapping[str, Any]] = None,
        cli_values: Optional[Mapping[str, Any]] = None,
    ) -> "Settings":
        """按 CLI > 配置文件 > 环境变量 > 默认值 的优先级合并出新的配置。"""
        combined: Dict[str, Any] = self.as_dict()
        for source in (file_values or {}, cli_values or {}):
            for key, value in source.items():
                if value is None:
                    continue
                if key not in CONFIG_KEYS:
                    raise InvalidInputError(f"unknown setting {key!r}")
                combined[key] = value
        logger.debug("Effective settings: %s", combined)
        return Settings(**combined)


settings = Settings()
