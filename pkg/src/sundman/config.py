"""Run configuration shared by the library entry points and the CLI."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Mapping

CONFIG_ENV = "SUNDMAN_CONFIG"
FORMATS = ("json", "csv", "pretty")


@dataclass(frozen=True)
class RunConfig:
    q_tol: float = 1e-9
    zero_tol: float = 1e-12
    affine_tol: float = 1e-7
    quad_tol: float = 1e-13
    ivp_tol: float = 1e-10
    base_point: float | None = None
    grid_n: int = 64
    output_format: str = "json"
    auto_split: bool = False
    velocity_box: float = 2.0
    verify_tol: float = 1e-6

    def __post_init__(self):
        for name in ("q_tol", "zero_tol", "affine_tol", "quad_tol", "ivp_tol", "velocity_box", "verify_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 16:
            raise ValueError(f"grid_n must be an integer >= 16, got {self.grid_n!r}")
        if self.output_format not in FORMATS:
            raise ValueError(f"output_format must be one of {FORMATS}, got {self.output_format!r}")

    def with_(self, **changes: Any) -> "RunConfig":
        """Copy with the non-None entries of ``changes`` applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown configuration keys {sorted(unknown)}")
        return cls(**dict(data))

    @classmethod
    def load(cls, path: str | None = None) -> "RunConfig":
        """Read a JSON config from ``path``, else from $SUNDMAN_CONFIG, else defaults."""
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))
