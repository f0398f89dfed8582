"""Service configuration: JSON file, then ``NAMELINK_*`` environment, then explicit overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import ConfigInvalid
from ..matchers import MatcherConstants

__all__ = ["ENV_PREFIX", "ServiceConfig", "load_config"]

ENV_PREFIX = "NAMELINK_"


@dataclass(frozen=True)
class ServiceConfig:
    """Every key the service reads.

    ``threshold`` left as None means "take it from the calibration artifact"
    (``calibration_path`` or the shipped default). File paths left as None
    select the packaged lexicon and template.
    """

    host: str = "127.0.0.1"
    port: int = 8080
    backend: str = "mock"
    backend_url: Optional[str] = None
    threshold: Optional[float] = None
    calibration_path: Optional[str] = None
    lexicon_path: Optional[str] = None
    template_path: Optional[str] = None
    batch_size: int = 64
    timeout_ms: int = 2000
    max_retries: int = 2
    max_in_flight: int = 4
    mock_constants: dict = field(default_factory=dict)

    def validate(self) -> "ServiceConfig":
        if self.backend not in ("mock", "remote"):
            raise ConfigInvalid(f"backend must be 'mock' or 'remote', got {self.backend!r}")
        if self.backend == "remote" and not self.backend_url:
            raise ConfigInvalid("remote backend needs backend_url")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ConfigInvalid(f"threshold must lie in [0, 1], got {self.threshold}")
        for name in ("batch_size", "max_in_flight"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be >= 1")
        if self.timeout_ms <= 0 or self.max_retries < 0:
            raise ConfigInvalid("timeout_ms must be positive and max_retries non-negative")
        if not 0 <= self.port <= 65535:
            raise ConfigInvalid(f"port out of range: {self.port}")
        for name in ("calibration_path", "lexicon_path", "template_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigInvalid(f"{name} does not exist: {path}")
        self.constants()
        return self

    def constants(self) -> MatcherConstants:
        try:
            return MatcherConstants(**self.mock_constants)
        except TypeError as exc:
            raise ConfigInvalid(f"unknown mock constant: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(ServiceConfig)}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    default = _FIELDS[name].default
    try:
        if name == "mock_constants":
            value = json.loads(value) if isinstance(value, str) else value
            if not isinstance(value, dict):
                raise ValueError("expected an object")
            return {k: float(v) for k, v in value.items()}
        if name == "threshold":
            return float(value)
        if isinstance(default, int):
            return int(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad value for {name}: {value!r}") from exc


def load_config(
    path: str | Path | None = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ServiceConfig:
    """Merge file < environment < overrides and validate the result.

    Overrides whose value is None are ignored, so argparse namespaces can be
    passed straight through.
    """
    env = os.environ if env is None else env
    merged: dict[str, Any] = {}
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        unknown = set(obj) - set(_FIELDS)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        merged.update(obj)
    for name in _FIELDS:
        key = ENV_PREFIX + name.upper()
        if key in env:
            merged[name] = env[key]
    for name, value in (overrides or {}).items():
        if name in _FIELDS and value is not None:
            merged[name] = value
    return ServiceConfig(**{k: _coerce(k, v) for k, v in merged.items()}).validate()
