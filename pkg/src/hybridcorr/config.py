"""Sweep configuration: a JSON key-value file plus ``--set key=value`` overrides."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

GRID_KEYS = ("p", "r_abs", "r_arg", "beta_re", "beta_im", "nbar", "dim", "kraus_cutoff", "mode")
_FLOAT_KEYS = ("p", "r_abs", "r_arg", "beta_re", "beta_im", "nbar")
_INT_KEYS = ("dim", "kraus_cutoff")


class ConfigError(ValueError):
    """Malformed configuration or empty parameter grid (CLI exit code 2)."""


@dataclass
class SweepConfig:
    """Parameter grids and run options.

    ``dim`` and ``kraus_cutoff`` entries may be ``null`` to pick them
    automatically (containment rule of thumb / spectral tail ``tail_eps``).
    """

    p: list[float] = field(default_factory=lambda: [0.5])
    r_abs: list[float] = field(default_factory=lambda: [0.5])
    r_arg: list[float] = field(default_factory=lambda: [0.0])
    beta_re: list[float] = field(default_factory=lambda: [4.0])
    beta_im: list[float] = field(default_factory=lambda: [0.0])
    nbar: list[float] = field(default_factory=lambda: [0.0])
    dim: list[int | None] = field(default_factory=lambda: [None])
    kraus_cutoff: list[int | None] = field(default_factory=lambda: [None])
    mode: list[str] = field(default_factory=lambda: ["unitary_correction"])
    trace_tol: float = 1e-6
    tail_eps: float = 1e-7
    teleport_quadrature: int = 5
    rsp_quadrature: int = 64
    dz_grid: list[int] = field(default_factory=lambda: [32, 64])
    figure_beta: float = 4.0
    figure_r_points: int = 11
    figure_nbar_grid: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    seed: int = 0
    timing: bool = False

    def validate(self) -> "SweepConfig":
        for key in GRID_KEYS:
            val = getattr(self, key)
            if not isinstance(val, list) or len(val) == 0:
                raise ConfigError(f"grid {key!r} must be a non-empty list")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if len(self.dz_grid) != 2:
            raise ConfigError("dz_grid must be [n_theta, n_phi]")
        # typed grids keep CSV/JSON output independent of how numbers were spelled
        try:
            for key in _FLOAT_KEYS:
                setattr(self, key, [float(v) for v in getattr(self, key)])
            for key in _INT_KEYS:
                vals = getattr(self, key)
                if any(v is not None and float(v) != int(v) for v in vals):
                    raise ConfigError(f"grid {key!r} must hold integers or null")
                setattr(self, key, [None if v is None else int(v) for v in vals])
            self.figure_nbar_grid = [float(v) for v in self.figure_nbar_grid]
            self.figure_beta = float(self.figure_beta)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"non-numeric grid value: {exc}") from exc
        return self

    def grid(self, keys: tuple[str, ...] = GRID_KEYS) -> list[dict[str, Any]]:
        """Cartesian product in a fixed order (last key varies fastest)."""
        return [dict(zip(keys, combo)) for combo in itertools.product(*(getattr(self, k) for k in keys))]


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | Path | None = None, overrides: list[str] | None = None, **flags: Any) -> SweepConfig:
    """Build a config from file, then ``key=value`` overrides, then explicit flags (flags win)."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        data[key.strip()] = _parse_value(raw.strip())
    data.update({k: v for k, v in flags.items() if v is not None})
    known = {f.name for f in fields(SweepConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in GRID_KEYS:
        if key in data and not isinstance(data[key], list):
            data[key] = [data[key]]
    return SweepConfig(**data).validate()
