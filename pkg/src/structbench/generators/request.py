"""Generation requests and class-count allocation shared by all generators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..data.table import MISSING_CODE, DataTable
from ..errors import SchemaError

DEFAULT_RATIO = 3.0


@dataclass(frozen=True)
class GenRequest:
    """What to generate: ``n_syn`` rows resembling ``train``.

    ``n_syn`` defaults to three times the training size; ``stratify``
    defaults to true exactly when the table has a categorical target.
    """

    train: DataTable
    n_syn: Optional[int] = None
    seed: int = 0
    stratify: Optional[bool] = None

    def __post_init__(self) -> None:
        if len(self.train) == 0:
            raise SchemaError("training table is empty")
        if self.n_syn is None:
            object.__setattr__(self, "n_syn", int(round(DEFAULT_RATIO * len(self.train))))
        if self.n_syn < 1:
            raise ValueError("n_syn must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.stratify is None:
            object.__setattr__(self, "stratify", self.train.is_classification)
        if self.stratify and not self.train.is_classification:
            raise SchemaError("stratification needs a categorical target")

    @classmethod
    def with_ratio(cls, train: DataTable, ratio: float, seed: int = 0, stratify: Optional[bool] = None) -> "GenRequest":
        if ratio <= 0:
            raise ValueError("ratio must be positive")
        return cls(train, max(1, int(round(ratio * len(train)))), seed, stratify)

    def class_counts(self) -> np.ndarray:
        """Per-class synthetic row counts proportional to the training classes."""
        codes = self.train.column(self.train.target)
        k = len(self.train.spec(self.train.target).categories)
        return allocate(np.bincount(codes[codes != MISSING_CODE], minlength=k), self.n_syn)


def allocate(weights, total: int) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` to ``weights``.

    Each share is within one of its exact quota; ties go to the lower index.
    """
    w = np.asarray(weights, dtype=float)
    if w.sum() <= 0:
        raise ValueError("weights must have positive sum")
    quota = total * w / w.sum()
    out = np.floor(quota).astype(np.int64)
    rem = total - int(out.sum())
    order = np.lexsort((np.arange(len(w)), -(quota - out)))
    out[order[:rem]] += 1
    return out


def rng_for(seed: int, *salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *salt]))
