"""Experiment configuration: a flat YAML mapping validated against a fixed schema.

Every key has a type, a default and (where useful) an allowed range. Unknown
keys are rejected. Command-line flags map one-to-one onto these keys.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional, Union

import yaml

KINDS = ("gs", "droplet", "chaos", "variance", "stiffness", "window", "selftest")
TOPOLOGIES = ("open", "periodic")
BCS = ("free", "periodic", "antiperiodic")
ENSEMBLES = ("FF", "PA", "identical")
METHODS = ("auto", "enumeration", "column_dp")

# keys that do not influence result bytes
_RUNTIME_KEYS = ("out", "workers")


class ConfigError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "selftest"
    d: int = 2
    L: tuple = (4,)
    topology: Optional[str] = None  # default follows bc
    bc: str = "free"
    ensemble: str = "FF"
    method: str = "auto"
    n_real: int = 100
    seed: int = 0
    t_min: float = 1e-6
    t_max: float = 10.0
    n_t: int = 25
    t: float = 0.5
    n_s: int = 20
    eps: float = 0.05
    deltas: tuple = (0.05, 0.1, 0.2)
    window: tuple = ()
    edge: int = 0
    n_real_droplet: int = 20
    theta2: Optional[float] = None
    theta2_se: float = 0.0
    ferromagnet: bool = False
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    # -- validation -------------------------------------------------------------
    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        if self.d not in (1, 2, 3):
            raise ConfigError("d", "must be 1, 2 or 3")
        if not self.L or any(int(x) < 2 for x in self.L):
            raise ConfigError("L", "needs at least one side length >= 2")
        if self.topology is not None and self.topology not in TOPOLOGIES:
            raise ConfigError("topology", f"must be one of {TOPOLOGIES}")
        if self.bc not in BCS:
            raise ConfigError("bc", f"must be one of {BCS}")
        if self.bc != "free" and self.resolved_topology != "periodic":
            raise ConfigError("topology", f"bc {self.bc!r} needs a periodic box")
        if self.ensemble not in ENSEMBLES:
            raise ConfigError("ensemble", f"must be one of {ENSEMBLES}")
        if self.method not in METHODS:
            raise ConfigError("method", f"must be one of {METHODS}")
        if self.n_real < 1:
            raise ConfigError("n_real", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not 0 < self.t_min < self.t_max <= 50:
            raise ConfigError("t_min", "need 0 < t_min < t_max <= 50")
        if self.n_t < 2:
            raise ConfigError("n_t", "must be >= 2")
        if not self.t > 0:
            raise ConfigError("t", "must be positive")
        if self.n_s < 20:
            raise ConfigError("n_s", "quadrature needs at least 20 s points")
        if not 0 < self.eps <= 1:
            raise ConfigError("eps", "must lie in (0, 1]")
        if any(d <= 0 for d in self.deltas):
            raise ConfigError("deltas", "must be positive")
        if self.kind == "window" and not 1 <= len(self.window) <= 4:
            raise ConfigError("window", "window experiments need 1 to 4 edge indices")
        if self.kind in ("chaos", "droplet", "stiffness") and len(self.L) < 3:
            raise ConfigError("L", f"{self.kind} needs at least 3 sizes")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    @property
    def resolved_topology(self) -> str:
        if self.topology is not None:
            return self.topology
        return "periodic" if self.bc in ("periodic", "antiperiodic") else "open"

    # -- (de)serialisation ----------------------------------------------------------
    def to_dict(self) -> dict:
        out = asdict(self)
        out["L"] = list(self.L)
        out["deltas"] = list(self.deltas)
        out["window"] = list(self.window)
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def config_hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _RUNTIME_KEYS}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(key, "unknown key")
            kwargs[key] = _coerce(key, value, known[key].default)
        return cls(**kwargs)

    @classmethod
    def load(cls, path: Union[str, Path], overrides: Optional[dict] = None) -> "ExperimentConfig":
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError("<file>", "config must be a key-value mapping")
        data.update(overrides or {})
        return cls.from_dict(data)

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return ExperimentConfig.from_dict(d)


def _coerce(key: str, value: Any, default: Any) -> Any:
    try:
        if key in ("L", "deltas", "window"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            elif not isinstance(value, (list, tuple)):
                value = [value]
            conv = float if key == "deltas" else int
            return tuple(conv(v) for v in value)
        if key in ("topology", "theta2") and value is None:
            return None
        if key == "theta2":
            return float(value)
        if key == "ferromagnet":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(value)
                return value.lower() in ("true", "1", "yes")
            return bool(value)
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot interpret {value!r}") from None
