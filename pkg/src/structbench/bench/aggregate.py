"""Cross-dataset ADTM aggregation and per-dimension averages."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .config import REFERENCE
from .records import DIMENSIONS, METRICS, Orientation, RunRecord, metrics_for_task


@dataclass(frozen=True)
class Cell:
    """One (dataset, metric) cell: raw means over seeds and their affine images."""

    task: str
    dataset: str
    metric: str
    raw: dict[str, float]
    normalised: dict[str, float]
    degenerate: bool


@dataclass(frozen=True)
class AggregateReport:
    """ADTM summary: ``scores[task][generator][metric] = (mean, std)``.

    ``mean`` averages the per-dataset normalised means; ``std`` averages,
    over datasets, the standard deviation across seeds of normalised values.
    """

    scores: dict[str, dict[str, dict[str, tuple[float, float]]]]
    cells: tuple[Cell, ...]
    orientation: dict[str, str] = field(default_factory=lambda: {m: o.value for m, (_, o) in METRICS.items()})
    failed: tuple[tuple[str, int, str], ...] = ()
    reference_in_endpoints: bool = True

    @property
    def degenerate_cells(self) -> list[tuple[str, str]]:
        return [(c.dataset, c.metric) for c in self.cells if c.degenerate]

    def generators(self, task: str) -> list[str]:
        return list(self.scores.get(task, {}))

    def to_dict(self) -> dict:
        return {
            "scores": {t: {g: {m: list(v) for m, v in ms.items()} for g, ms in gs.items()}
                       for t, gs in self.scores.items()},
            "cells": [c.__dict__ for c in self.cells],
            "orientation": dict(self.orientation),
            "failed": [list(k) for k in self.failed],
            "reference_in_endpoints": self.reference_in_endpoints,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateReport":
        return cls(
            {t: {g: {m: tuple(v) for m, v in ms.items()} for g, ms in gs.items()} for t, gs in d["scores"].items()},
            tuple(Cell(**c) for c in d["cells"]),
            dict(d["orientation"]),
            tuple(tuple(k) for k in d["failed"]),
            d["reference_in_endpoints"],
        )


def endpoints(values: Iterable[float], orientation: Orientation) -> tuple[float, float]:
    """``(best, worst)`` of a cell under the metric's orientation."""
    pool = list(values)
    hi, lo = max(pool), min(pool)
    return (hi, lo) if orientation is Orientation.HIGHER_BETTER else (lo, hi)


def affine(values: dict[str, float], orientation: Orientation) -> tuple[dict[str, float], bool]:
    """Map values so the best goes to 1 and the worst to 0.

    Returns ``(mapping, degenerate)``; a cell whose endpoints coincide maps
    every entry to 1.
    """
    best, worst = endpoints(values.values(), orientation)
    if best == worst:
        return {g: 1.0 for g in values}, True
    return {g: (v - worst) / (best - worst) for g, v in values.items()}, False


def adtm_aggregate(records: Iterable[RunRecord], include_reference: bool = True) -> AggregateReport:
    """Normalise each (dataset, metric) cell between its best and worst
    generator, then average across datasets within each task.

    Failed records are ignored. With ``include_reference`` false the
    reference pseudo-generator is left out of the aggregate entirely.
    """
    records = sorted(records, key=lambda r: r.key)
    failed = tuple(r.key for r in records if not r.ok)
    # (task, dataset, metric) -> generator -> seed -> value
    values: dict = defaultdict(lambda: defaultdict(dict))
    for r in records:
        if not r.ok or (r.generator == REFERENCE and not include_reference):
            continue
        for m, v in r.metrics().items():
            values[(r.task, r.dataset, m)][r.generator][r.seed] = v

    cells = []
    per_gen: dict = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))  # task -> gen -> metric -> [(mean, std)]
    for (task, dataset, metric), by_gen in sorted(values.items()):
        orient = METRICS[metric][1]
        means = {g: float(np.mean(list(s.values()))) for g, s in sorted(by_gen.items())}
        norm, degenerate = affine(means, orient)
        if len(means) < 2:
            degenerate, norm = True, {g: 1.0 for g in means}
        cells.append(Cell(task, dataset, metric, means, norm, degenerate))
        best, worst = endpoints(means.values(), orient)
        for g, seeds in by_gen.items():
            seed_norm = [1.0 if degenerate else (v - worst) / (best - worst) for v in seeds.values()]
            per_gen[task][g][metric].append((norm[g], float(np.std(seed_norm))))

    scores = {}
    for task in sorted(per_gen):
        scores[task] = {}
        for g in _generator_order(per_gen[task]):
            scores[task][g] = {
                m: (float(np.mean([a for a, _ in per_gen[task][g][m]])), float(np.mean([b for _, b in per_gen[task][g][m]])))
                for m in metrics_for_task(task) if m in per_gen[task][g]
            }
    return AggregateReport(scores, tuple(cells), failed=failed, reference_in_endpoints=include_reference)


def _generator_order(gens) -> list[str]:
    return sorted(gens, key=lambda g: (g != REFERENCE, g))


@dataclass(frozen=True)
class DimensionScore:
    value: float
    flagged: bool  # some of the dimension's metrics were missing


def dimension_average(report: AggregateReport) -> dict[str, dict[str, dict[str, DimensionScore]]]:
    """Mean normalised score per evaluation dimension, per task and generator."""
    out: dict = {}
    for task, gens in report.scores.items():
        expected = metrics_for_task(task)
        out[task] = {}
        for g, ms in gens.items():
            out[task][g] = {}
            for dim in DIMENSIONS:
                want = [m for m in expected if METRICS[m][0] == dim]
                have = [ms[m][0] for m in want if m in ms]
                if have:
                    out[task][g][dim] = DimensionScore(float(np.mean(have)), len(have) < len(want))
    return out
