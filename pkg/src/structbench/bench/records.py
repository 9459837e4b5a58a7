"""Per-(dataset, seed, generator) run records and their canonical JSON form."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from ..metrics import DensityReport, PrivacyReport, StructuralFidelityReport, UtilityReport


class Orientation(str, enum.Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


# metric -> (dimension, orientation)
METRICS: dict[str, tuple[str, Orientation]] = {
    "global_independence": ("structural", Orientation.HIGHER_BETTER),
    "local_independence": ("structural", Orientation.HIGHER_BETTER),
    "shape": ("density", Orientation.HIGHER_BETTER),
    "trend": ("density", Orientation.HIGHER_BETTER),
    "alpha_precision": ("density", Orientation.HIGHER_BETTER),
    "beta_recall": ("density", Orientation.HIGHER_BETTER),
    "dcr": ("privacy", Orientation.HIGHER_BETTER),
    "authenticity": ("privacy", Orientation.HIGHER_BETTER),
    "balanced_accuracy": ("utility", Orientation.HIGHER_BETTER),
    "rmse": ("utility", Orientation.LOWER_BETTER),
}
DIMENSIONS = ("structural", "density", "privacy", "utility")


def metrics_for_task(task: str) -> tuple[str, ...]:
    drop = "rmse" if task == "classification" else "balanced_accuracy"
    return tuple(m for m in METRICS if m != drop)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (dataset, seed, generator) triple.

    A failed triple carries ``error`` and no reports. ``wall_time_s`` is kept
    out of the canonical JSON so that repeated sweeps serialise identically.
    """

    dataset: str
    seed: int
    generator: str
    task: str
    structural: Optional[StructuralFidelityReport] = None
    density: Optional[DensityReport] = None
    privacy: Optional[PrivacyReport] = None
    utility: Optional[UtilityReport] = None
    error: Optional[str] = None
    wall_time_s: float = 0.0

    def __post_init__(self) -> None:
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.wall_time_s < 0:
            raise ValueError("wall_time_s must be non-negative")
        reports = (self.structural, self.density, self.privacy, self.utility)
        if self.error is None and any(r is None for r in reports):
            raise ValueError("a successful record needs all four reports")

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.dataset, self.seed, self.generator)

    @property
    def ok(self) -> bool:
        return self.error is None

    def metrics(self) -> dict[str, float]:
        """Flat metric values; empty for failed records."""
        if not self.ok:
            return {}
        out = {"global_independence": self.structural.global_bacc}
        if self.structural.local is not None:
            out["local_independence"] = self.structural.local_bacc
        out.update(
            shape=self.density.shape,
            trend=self.density.trend,
            alpha_precision=self.density.alpha_precision,
            beta_recall=self.density.beta_recall,
            dcr=self.privacy.dcr,
            authenticity=self.privacy.authenticity,
        )
        out["balanced_accuracy" if self.task == "classification" else "rmse"] = self.utility.mean_score
        return {k: v for k, v in out.items() if math.isfinite(v)}

    def to_dict(self) -> dict:
        def rep(r):
            return None if r is None else r.to_dict()

        return {
            "dataset": self.dataset,
            "seed": self.seed,
            "generator": self.generator,
            "task": self.task,
            "structural": rep(self.structural),
            "density": rep(self.density),
            "privacy": rep(self.privacy),
            "utility": rep(self.utility),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict, wall_time_s: float = 0.0) -> "RunRecord":
        def rep(kind, v):
            return None if v is None else kind.from_dict(v)

        return cls(
            d["dataset"],
            int(d["seed"]),
            d["generator"],
            d["task"],
            rep(StructuralFidelityReport, d["structural"]),
            rep(DensityReport, d["density"]),
            rep(PrivacyReport, d["privacy"]),
            rep(UtilityReport, d["utility"]),
            d.get("error"),
            wall_time_s,
        )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def records_to_json(records: Iterable[RunRecord]) -> str:
    return json.dumps([r.to_dict() for r in records], sort_keys=True, indent=1, allow_nan=False) + "\n"


def records_from_json(text: str) -> list[RunRecord]:
    return [RunRecord.from_dict(d) for d in json.loads(text)]


def read_jsonl(path: Path) -> list[RunRecord]:
    """Records from an append log; a truncated final line is ignored."""
    if not path.exists():
        return []
    out = []
    lines = path.read_text().splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(RunRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError):
            if i == len(lines) - 1:
                break
            raise
    return out
