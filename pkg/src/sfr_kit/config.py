"""Reward hyperparameters.

Field names mirror the JSON config layout, which is part of the external
interface: per-task weight blocks plus two global switches. Defaults are the
tuned training values; construct with overrides or load a JSON file that
specifies only the keys to change.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Raised for unknown keys or out-of-range hyperparameters."""


@dataclass(frozen=True)
class NerWeights:
    w_t: float = 0.2
    w_p: float = 0.8
    gamma: float = 1.5
    lambda_t: float = 0.6
    lambda_p: float = 0.2


@dataclass(frozen=True)
class ReWeights:
    w_t: float = 0.05
    w_h: float = 0.10
    w_a: float = 0.10
    w_r: float = 0.75
    gamma: float = 1.3
    lambda_t: float = 0.15
    lambda_r: float = 0.25


@dataclass(frozen=True)
class EeWeights:
    w_E: float = 0.05
    w_T: float = 0.15
    w_F: float = 0.8
    gamma: float = 1.0
    lambda_E: float = 1.0
    lambda_T: float = 0.5
    lambda_F: float = 0.3


@dataclass(frozen=True)
class SfrConfig:
    """Complete reward configuration across the three tasks."""

    ner: NerWeights = field(default_factory=NerWeights)
    re: ReWeights = field(default_factory=ReWeights)
    ee: EeWeights = field(default_factory=EeWeights)
    clip_to_unit: bool = False
    f1_empty_empty: float = 1.0

    def __post_init__(self) -> None:
        for block in (self.ner, self.re, self.ee):
            for weight_field in dataclasses.fields(block):
                value = getattr(block, weight_field.name)
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ConfigError(f"{weight_field.name} must be a number, got {value!r}")
                if weight_field.name == "gamma":
                    if value <= 0:
                        raise ConfigError(f"gamma must be positive, got {value}")
                elif value < 0:
                    raise ConfigError(f"{weight_field.name} must be non-negative, got {value}")
        if not 0.0 <= self.f1_empty_empty <= 1.0:
            raise ConfigError(f"f1_empty_empty must be in [0, 1], got {self.f1_empty_empty}")
        if not isinstance(self.clip_to_unit, bool):
            raise ConfigError(f"clip_to_unit must be a boolean, got {self.clip_to_unit!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SfrConfig":
        """Build a config from a (possibly partial) dict, defaults filling the rest."""
        if not isinstance(data, dict):
            raise ConfigError(f"config must be an object, got {type(data).__name__}")
        blocks = {"ner": NerWeights, "re": ReWeights, "ee": EeWeights}
        kwargs: dict = {}
        for key, value in data.items():
            if key in blocks:
                if not isinstance(value, dict):
                    raise ConfigError(f"{key} block must be an object")
                known = {f.name for f in dataclasses.fields(blocks[key])}
                unknown = set(value) - known
                if unknown:
                    raise ConfigError(f"unknown {key} keys: {sorted(unknown)}")
                kwargs[key] = blocks[key](**value)
            elif key in ("clip_to_unit", "f1_empty_empty"):
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key: {key!r}")
        return cls(**kwargs)

    def merged(self, overrides: dict) -> "SfrConfig":
        """Apply a partial override dict on top of this config."""
        base = self.to_dict()
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                base[key].update(value)
            else:
                base[key] = value
        return SfrConfig.from_dict(base)

    @classmethod
    def load(cls, path: str | Path) -> "SfrConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        try:
            return cls.from_dict(data)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


DEFAULT_CONFIG = SfrConfig()
