"""Mean/mode imputation, one-hot encoding and z-scoring fitted on training data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import SchemaError
from .table import MISSING_CODE, ColumnSchema, DataTable


@dataclass(frozen=True)
class NumericStats:
    mean: float
    std: float  # population std; 1.0 for constant training columns


@dataclass(frozen=True)
class CategoricalStats:
    mode: int
    width: int


@dataclass(frozen=True)
class Preprocessor:
    schema: tuple[ColumnSchema, ...]
    stats: tuple[NumericStats | CategoricalStats, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    @property
    def width(self) -> int:
        return sum(1 if isinstance(s, NumericStats) else s.width for s in self.stats)

    def feature_names(self) -> list[str]:
        out = []
        for col in self.schema:
            if col.is_categorical:
                out.extend(f"{col.name}={c}" for c in col.categories)
            else:
                out.append(col.name)
        return out

    def transform(self, table: DataTable) -> np.ndarray:
        return apply_preprocessor(self, table)


def fit_preprocessor(train: DataTable, columns: Optional[Sequence[str]] = None) -> Preprocessor:
    """Record per-column statistics on ``train`` (restricted to ``columns`` if given)."""
    if len(train) == 0:
        raise SchemaError("cannot fit a preprocessor on an empty table")
    names = list(columns) if columns is not None else list(train.names)
    schema, stats = [], []
    for name in names:
        col = train.spec(name)
        arr = train.column(name)
        present = ~train.missing_mask(name)
        if not present.any():
            raise SchemaError("column is entirely missing", column=name)
        if col.is_categorical:
            counts = np.bincount(arr[present], minlength=len(col.categories))
            stats.append(CategoricalStats(int(np.argmax(counts)), len(col.categories)))
        else:
            vals = arr[present]
            mean = float(vals.mean())
            std = float(vals.std())
            stats.append(NumericStats(mean, std if std > 0 else 1.0))
        schema.append(col)
    return Preprocessor(tuple(schema), tuple(stats))


def apply_preprocessor(p: Preprocessor, table: DataTable) -> np.ndarray:
    """Impute, z-score and one-hot ``table`` into an ``(n, p.width)`` float matrix."""
    n = len(table)
    out = np.zeros((n, p.width), dtype=np.float64)
    j = 0
    for col, st in zip(p.schema, p.stats):
        if table.spec(col.name) != col:
            raise SchemaError("schema does not match the fitted preprocessor", column=col.name)
        arr = table.column(col.name)
        if isinstance(st, NumericStats):
            vals = np.where(np.isnan(arr), st.mean, arr)
            out[:, j] = (vals - st.mean) / st.std
            j += 1
        else:
            codes = np.where(arr == MISSING_CODE, st.mode, arr)
            out[np.arange(n), j + codes] = 1.0
            j += st.width
    return out
