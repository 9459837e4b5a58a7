"""Benchmark run configuration."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from ..errors import ConfigError
from ..generators import BUILTIN

OUTPUT_DIR_ENV = "STRUCTBENCH_OUTPUT_DIR"
REFERENCE = "D_ref"


@dataclass(frozen=True)
class GeneratorSpec:
    """A built-in generator, or an external one read from ``directory``."""

    name: str
    directory: Optional[str] = None

    @property
    def external(self) -> bool:
        return self.directory is not None

    @classmethod
    def parse(cls, entry) -> "GeneratorSpec":
        if isinstance(entry, str):
            if entry not in BUILTIN:
                raise ConfigError(f"unknown built-in generator {entry!r}; external ones need a directory")
            return cls(entry)
        if isinstance(entry, dict) and isinstance(entry.get("name"), str) and isinstance(entry.get("dir"), str):
            if entry["name"] in BUILTIN or entry["name"] == REFERENCE:
                raise ConfigError(f"external generator name {entry['name']!r} clashes with a built-in")
            return cls(entry["name"], entry["dir"])
        raise ConfigError(f"generator entries are built-in names or {{'name', 'dir'}} objects, got {entry!r}")

    def to_json(self):
        return self.name if self.directory is None else {"name": self.name, "dir": self.directory}


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple[str, ...]
    generators: tuple[GeneratorSpec, ...]
    seeds: tuple[int, ...] = tuple(range(10))
    n_syn_ratio: float = 3.0
    alpha: float = 0.01
    max_cond_size: int = 2
    statement_cap: int = 20_000
    output_dir: str = "structbench-out"
    n_rows: int = 2000
    data_seed: int = 0
    include_reference: bool = True

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ConfigError("datasets must be non-empty")
        if not self.generators:
            raise ConfigError("generators must be non-empty")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds) or min(self.seeds) < 0:
            raise ConfigError("seeds must be distinct non-negative integers")
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ConfigError("generator names must be distinct")
        stems = [Path(d).stem for d in self.datasets]
        if len(set(stems)) != len(stems):
            raise ConfigError("dataset file names must be distinct")
        if not self.n_syn_ratio > 0:
            raise ConfigError("n_syn_ratio must be positive")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.max_cond_size < 0 or self.statement_cap < 1:
            raise ConfigError("max_cond_size must be >= 0 and statement_cap >= 1")
        if self.n_rows < 20:
            raise ConfigError("n_rows must be at least 20")

    @property
    def generator_names(self) -> tuple[str, ...]:
        names = tuple(g.name for g in self.generators)
        return ((REFERENCE,) if self.include_reference else ()) + names

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("datasets", "generators"):
            if not isinstance(d.get(key), list):
                raise ConfigError(f"{key!r} must be a list")
        kw = dict(d)

        def resolve(p):
            if not isinstance(p, str):
                raise ConfigError(f"expected a path string, got {p!r}")
            return str(base / p) if base is not None and not Path(p).is_absolute() else p

        kw["datasets"] = tuple(resolve(p) for p in d["datasets"])
        if "output_dir" in d:
            kw["output_dir"] = resolve(d["output_dir"])
        gens = [GeneratorSpec.parse(g) for g in d["generators"]]
        kw["generators"] = tuple(GeneratorSpec(g.name, resolve(g.directory)) if g.external else g for g in gens)
        if "seeds" in d:
            if not isinstance(d["seeds"], list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in d["seeds"]):
                raise ConfigError("seeds must be a list of integers")
            kw["seeds"] = tuple(d["seeds"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        p = Path(path)
        try:
            doc = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        cfg = cls.from_dict(doc, base=p.parent)
        return cfg.with_env()

    def with_env(self) -> "RunConfig":
        """Apply the output-directory override from the environment."""
        override = os.environ.get(OUTPUT_DIR_ENV)
        return self.replace(output_dir=override) if override else self

    def replace(self, **changes) -> "RunConfig":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return RunConfig(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["datasets"] = list(self.datasets)
        d["generators"] = [g.to_json() for g in self.generators]
        d["seeds"] = list(self.seeds)
        return d
