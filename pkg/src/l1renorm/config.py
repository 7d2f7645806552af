"""Experiment configuration: flat JSON files plus flag overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict, replace

import numpy as np

__all__ = ["GridSpec", "ExperimentConfig"]


@dataclass(frozen=True)
class GridSpec:
    """A 1-d grid: [min, max] with `count` nodes, linear or log spaced."""

    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid count must be >= 1")
        if self.max < self.min:
            raise ValueError("grid max must be >= min")
        if self.count > 1 and self.max == self.min:
            raise ValueError("grid must be strictly increasing")
        if self.spacing not in ("linear", "log"):
            raise ValueError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError("log spacing needs min > 0")

    def build(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse 'min:max:count[:spacing]'."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"bad grid spec {text!r}; want min:max:count[:spacing]")
        spacing = parts[3] if len(parts) == 4 else "linear"
        return cls(float(parts[0]), float(parts[1]), int(parts[2]), spacing)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    step_level: int = 16
    sample_count: int = 100_000
    pair_count: int = 10_000
    refinement_steps: int = 16
    tolerance_scalar: float = 1e-10
    tolerance_quadrature: float = 1e-8
    t_grid: GridSpec = field(default_factory=lambda: GridSpec(0.02, 0.98, 25))
    epsilon_grid: GridSpec = field(
        default_factory=lambda: GridSpec(0.25, 2.0, 5))
    tau_grid: GridSpec = field(
        default_factory=lambda: GridSpec(0.05, 1.0, 5, "log"))
    tree_eta: float = 0.9
    tree_depth: int = 5
    output_dir: str = "artifacts"

    def __post_init__(self):
        if self.tolerance_scalar <= 0 or self.tolerance_quadrature <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 <= self.step_level <= 24:
            raise ValueError("step_level must lie in [0, 24]")
        if self.sample_count < 1 or self.pair_count < 1:
            raise ValueError("counts must be positive")
        if not 0.0 < self.tree_eta < 1.0:
            raise ValueError("tree_eta must lie in (0, 1)")
        if self.tree_depth < 1:
            raise ValueError("tree_depth must be >= 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("t_grid", "epsilon_grid", "tau_grid"):
            g = getattr(self, key)
            out[key] = {"min": g.min, "max": g.max, "count": g.count,
                        "spacing": g.spacing}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        kwargs = dict(data)
        for key in ("t_grid", "epsilon_grid", "tau_grid"):
            if key in kwargs and isinstance(kwargs[key], dict):
                kwargs[key] = GridSpec(**kwargs[key])
            elif key in kwargs and isinstance(kwargs[key], str):
                kwargs[key] = GridSpec.parse(kwargs[key])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(kwargs) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        clean = {}
        for key, val in overrides.items():
            if val is None:
                continue
            if key in ("t_grid", "epsilon_grid", "tau_grid") and isinstance(val, str):
                val = GridSpec.parse(val)
            clean[key] = val
        return replace(self, **clean) if clean else self
