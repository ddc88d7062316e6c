"""Project configuration: a flat ``key = value`` text file.

Lines starting with ``#`` are comments; list values are comma-separated.
Paths are interpreted relative to the directory containing the config file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from pathlib import Path, PurePosixPath

APP_NAME_RE = re.compile(r"^[a-z][a-z0-9-]{0,62}$")


class ConfigError(Exception):
    pass


@dataclass
class ProjectConfig:
    app_name: str = ""
    source_dirs: tuple[str, ...] = ("src",)
    static_dir: str = "static"
    bucket: str = ""
    region: str = "us-east-1"
    provider: str = "aws"
    warming_enabled: bool = True
    warming_period_minutes: int = 5
    out_dir: str = "deploy"
    # Simulator model parameters (see the runtime simulator for semantics).
    max_instances: int = 1000
    service_time_ms: float = 200.0
    cold_start_ms: float = 400.0
    expiry_minutes: float = 15.0
    warm_pool_target: int = 1
    # Directory the config file was loaded from; anchors relative paths.
    root: Path = field(default_factory=Path)

    def validate(self) -> None:
        if not APP_NAME_RE.match(self.app_name):
            raise ConfigError(
                f"app_name {self.app_name!r} must match [a-z][a-z0-9-]{{0,62}}"
            )
        if self.warming_period_minutes < 1:
            raise ConfigError("warming_period_minutes must be >= 1")
        if self.max_instances < 1:
            raise ConfigError("max_instances must be >= 1")
        if self.service_time_ms <= 0:
            raise ConfigError("service_time_ms must be positive")

    def resolve(self, relative: str) -> Path:
        return self.root / PurePosixPath(relative)

    @property
    def out_path(self) -> Path:
        return self.resolve(self.out_dir)


_BOOL_KEYS = {"warming_enabled"}
_INT_KEYS = {"warming_period_minutes", "max_instances", "warm_pool_target"}
_FLOAT_KEYS = {"service_time_ms", "cold_start_ms", "expiry_minutes"}
_LIST_KEYS = {"source_dirs"}


def parse_key_values(text: str) -> dict[str, str]:
    """Parse a flat key = value file into a string map."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out

def parse_config_text(text: str, root: Path) -> ProjectConfig:
    known = {f.name for f in fields(ProjectConfig)} - {"root"}
    config = ProjectConfig(root=root)
    for key, value in parse_key_values(text).items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        if key in _BOOL_KEYS:
            if value.lower() not in ("true", "false"):
                raise ConfigError(f"{key} must be true or false, got {value!r}")
            setattr(config, key, value.lower() == "true")
        elif key in _INT_KEYS:
            try:
                setattr(config, key, int(value))
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                setattr(config, key, float(value))
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}") from None
        elif key in _LIST_KEYS:
            items = tuple(item.strip() for item in value.split(",") if item.strip())
            setattr(config, key, items)
        else:
            setattr(config, key, value)
    config.validate()
    return config


def load_config(path: str | Path) -> ProjectConfig:
    """Load and validate a project config file. I/O errors propagate."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_config_text(text, p.parent)
