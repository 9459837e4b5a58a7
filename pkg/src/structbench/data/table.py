"""Typed, immutable tabular data.

Numeric columns are stored as float64 with NaN marking a missing cell;
categorical columns as int64 codes into the schema's category list with -1
marking a missing cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from ..errors import SchemaError

MISSING_CODE = -1


class Kind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: Kind
    categories: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        if self.kind is Kind.CATEGORICAL:
            if not self.categories:
                raise SchemaError("categorical column needs categories", column=self.name)
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError("duplicate categories", column=self.name)
        elif self.categories:
            raise SchemaError("numeric column cannot declare categories", column=self.name)

    @property
    def is_categorical(self) -> bool:
        return self.kind is Kind.CATEGORICAL

    @classmethod
    def numeric(cls, name: str) -> "ColumnSchema":
        return cls(name, Kind.NUMERIC)

    @classmethod
    def categorical(cls, name: str, categories: Iterable[str]) -> "ColumnSchema":
        return cls(name, Kind.CATEGORICAL, tuple(categories))


class DataTable:
    """Column-oriented table validated against a list of :class:`ColumnSchema`."""

    def __init__(
        self,
        schema: Sequence[ColumnSchema],
        columns: Mapping[str, np.ndarray],
        target: Optional[str] = None,
        source: Optional[str] = None,
    ) -> None:
        self.schema = tuple(schema)
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        if set(columns) != set(names):
            extra = sorted(set(columns) ^ set(names))
            raise SchemaError(f"columns do not match schema: {extra}")
        if target is not None and target not in names:
            raise SchemaError("target is not a schema column", column=target)
        self.target = target
        self.source = source
        self._by_name = {c.name: c for c in self.schema}
        self._cols: dict[str, np.ndarray] = {}
        n = None
        for col in self.schema:
            arr = np.asarray(columns[col.name])
            if arr.ndim != 1:
                raise SchemaError("columns must be one-dimensional", column=col.name)
            if n is None:
                n = len(arr)
            elif len(arr) != n:
                raise SchemaError("ragged columns", column=col.name)
            if col.is_categorical:
                arr = arr.astype(np.int64, copy=True)
                bad = (arr < MISSING_CODE) | (arr >= len(col.categories))
                if bad.any():
                    raise SchemaError("category code out of range", row=int(np.argmax(bad)), column=col.name)
            else:
                arr = arr.astype(np.float64, copy=True)
                if np.isinf(arr).any():
                    raise SchemaError("numeric cells must be finite", row=int(np.argmax(np.isinf(arr))), column=col.name)
            arr.setflags(write=False)
            self._cols[col.name] = arr
        self._n = n or 0

    # construction helpers -------------------------------------------------

    @classmethod
    def from_labels(
        cls,
        schema: Sequence[ColumnSchema],
        data: Mapping[str, Sequence],
        target: Optional[str] = None,
        source: Optional[str] = None,
    ) -> "DataTable":
        """Build a table from category labels / floats; ``None`` marks missing."""
        cols = {}
        for col in schema:
            values = data[col.name]
            if col.is_categorical:
                lookup = {c: i for i, c in enumerate(col.categories)}
                codes = np.empty(len(values), dtype=np.int64)
                for i, v in enumerate(values):
                    if v is None:
                        codes[i] = MISSING_CODE
                    elif str(v) in lookup:
                        codes[i] = lookup[str(v)]
                    else:
                        raise SchemaError(f"undeclared category {v!r}", row=i, column=col.name)
                cols[col.name] = codes
            else:
                cols[col.name] = np.array([np.nan if v is None else float(v) for v in values], dtype=float)
        return cls(schema, cols, target=target, source=source)

    # accessors ------------------------------------------------------------

    def __len__(self) -> int:
        return self._n

    @property
    def n_rows(self) -> int:
        return self._n

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    def column(self, name: str) -> np.ndarray:
        try:
            return self._cols[name]
        except KeyError:
            raise SchemaError("no such column", column=name) from None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    def spec(self, name: str) -> ColumnSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError("no such column", column=name) from None

    def labels(self, name: str) -> list:
        """Cells of ``name`` as category labels or floats, ``None`` for missing."""
        col = self.spec(name)
        arr = self._cols[name]
        if col.is_categorical:
            return [None if c == MISSING_CODE else col.categories[c] for c in arr]
        return [None if np.isnan(v) else float(v) for v in arr]

    def missing_mask(self, name: str) -> np.ndarray:
        arr = self.column(name)
        if self.spec(name).is_categorical:
            return arr == MISSING_CODE
        return np.isnan(arr)

    def has_missing(self) -> bool:
        return any(self.missing_mask(c).any() for c in self.names)

    @property
    def is_classification(self) -> bool:
        return self.target is not None and self.spec(self.target).is_categorical

    # derivations ----------------------------------------------------------

    def take(self, indices) -> "DataTable":
        idx = np.asarray(indices, dtype=np.int64)
        return DataTable(self.schema, {k: v[idx] for k, v in self._cols.items()}, self.target, self.source)

    def with_source(self, source: Optional[str]) -> "DataTable":
        return DataTable(self.schema, self._cols, self.target, source)

    def select(self, names: Sequence[str]) -> "DataTable":
        schema = [self.spec(n) for n in names]
        target = self.target if self.target in names else None
        return DataTable(schema, {n: self._cols[n] for n in names}, target, self.source)

    def same_schema(self, other: "DataTable") -> bool:
        return self.schema == other.schema

    def equals(self, other: "DataTable") -> bool:
        """Cell-exact equality (NaN equals NaN), schema and target included."""
        if self.schema != other.schema or self.target != other.target or len(self) != len(other):
            return False
        return all(np.array_equal(self._cols[n], other._cols[n], equal_nan=not self.spec(n).is_categorical) for n in self.names)

    def __repr__(self) -> str:
        return f"DataTable(n_rows={self._n}, columns={list(self.names)}, target={self.target!r})"


def check_same_schema(a: DataTable, b: DataTable) -> None:
    if a.schema != b.schema:
        raise SchemaError("tables have different schemas")
