"""Nearest-neighbour privacy metrics in the one-hot + z-score space of the reference."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..data.preprocess import fit_preprocessor
from ..data.table import DataTable, check_same_schema
from ..errors import SchemaError


def lower_median(values: np.ndarray) -> float:
    """Median taking the lower middle element for even counts."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        raise ValueError("median of an empty array")
    return float(v[(len(v) - 1) // 2])


def _embed(ref: DataTable, syn: DataTable) -> tuple[np.ndarray, np.ndarray]:
    check_same_schema(ref, syn)
    if len(ref) == 0 or len(syn) == 0:
        raise SchemaError("privacy metrics need non-empty tables")
    pre = fit_preprocessor(ref)
    return pre.transform(ref), pre.transform(syn)


def dcr(ref: DataTable, syn: DataTable) -> float:
    """Lower median over synthetic rows of the distance to the closest reference row."""
    r, s = _embed(ref, syn)
    d, _ = cKDTree(r).query(s, k=1)
    return lower_median(d)


def authenticity(ref: DataTable, syn: DataTable) -> float:
    """Fraction of synthetic rows that are not closer to their nearest
    reference row than that row's own nearest reference neighbour.

    A row at distance 0 from a reference row is always unauthentic, even when
    the reference row has an exact duplicate.
    """
    if len(ref) < 2:
        raise SchemaError("authenticity needs at least two reference rows")
    r, s = _embed(ref, syn)
    tree = cKDTree(r)
    own, _ = tree.query(r, k=2)
    d, idx = tree.query(s, k=1)
    copied = d <= own[idx, 1]
    score = 1.0 - float(copied.mean())
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"authenticity {score} outside [0, 1]")
    return score


@dataclass(frozen=True)
class PrivacyReport:
    dcr: float
    authenticity: float
    space: str = "one-hot + z-score fitted on reference"
    median: str = "lower"

    def __post_init__(self) -> None:
        if not self.dcr >= 0.0:
            raise ValueError("dcr must be non-negative")
        if not 0.0 <= self.authenticity <= 1.0:
            raise ValueError("authenticity outside [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PrivacyReport":
        return cls(**d)


def privacy_report(ref: DataTable, syn: DataTable) -> PrivacyReport:
    return PrivacyReport(dcr(ref, syn), authenticity(ref, syn))


__all__ = ["PrivacyReport", "authenticity", "dcr", "lower_median", "privacy_report"]
