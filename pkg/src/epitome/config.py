"""Run configuration shared by every CLI command.

Precedence is flags > config file (JSON) > defaults.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .analysis import DEFAULT_THRESHOLD, DEFAULT_WORLD_YEARS
from .clustering import CENTROID_MODES
from .demographics import MIN_POPULATION, REFERENCE_YEAR, ColumnMap

FORMATS = ("csv", "json", "geojson-join", "svg")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: Path | None = None
    fixtures_only: bool = False
    variant: str = "Medium"
    reference_year: int = REFERENCE_YEAR
    world_years: tuple[int, ...] = DEFAULT_WORLD_YEARS
    threshold: float = DEFAULT_THRESHOLD
    delta: float | None = None  # None = auto
    min_population: float = MIN_POPULATION
    clusters: int = 7
    centroid_mode: str = "geometric"
    include_aggregates: bool = False
    out: Path = Path("out")
    formats: tuple[str, ...] | None = None  # None = every format the command supports
    column_map: ColumnMap = field(default_factory=ColumnMap)

    def validate(self) -> "RunConfig":
        if not self.threshold > 0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if self.clusters < 1:
            raise ConfigError(f"clusters must be >= 1, got {self.clusters}")
        if not self.world_years:
            raise ConfigError("world_years must not be empty")
        if self.min_population < 0:
            raise ConfigError("min_population must be >= 0")
        if self.centroid_mode not in CENTROID_MODES:
            raise ConfigError(f"centroid_mode must be one of {CENTROID_MODES}")
        if self.formats is not None:
            bad = set(self.formats) - set(FORMATS)
            if bad:
                raise ConfigError(f"unknown formats {sorted(bad)}; choose from {FORMATS}")
        if self.input is None and not self.fixtures_only:
            raise ConfigError("give --input FILE or --fixtures-only")
        return self

    def merged(self, overrides: dict) -> "RunConfig":
        """Copy with the non-None entries of ``overrides`` applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return replace(self, **_coerce({k: v for k, v in overrides.items() if v is not None}))


def _coerce(d: dict) -> dict:
    out = dict(d)
    if out.get("delta") == "auto":
        out["delta"] = None
    try:
        if "input" in out:
            out["input"] = Path(out["input"])
        if "out" in out:
            out["out"] = Path(out["out"])
        if "world_years" in out:
            out["world_years"] = tuple(int(y) for y in out["world_years"])
        if "formats" in out:
            out["formats"] = tuple(out["formats"])
        if "column_map" in out and isinstance(out["column_map"], dict):
            out["column_map"] = ColumnMap.from_dict(out["column_map"])
        for key, typ in (("reference_year", int), ("clusters", int), ("threshold", float),
                         ("delta", float), ("min_population", float)):
            if out.get(key) is not None:
                out[key] = typ(out[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return out


def load_config_file(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}
