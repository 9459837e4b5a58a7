"""Conditional-independence tests for categorical, numeric and mixed data.

* ``chi_square_ci``: Pearson chi-square summed over strata of the
  conditioning set.
* ``partial_corr_ci``: Fisher-z test of the partial Pearson correlation.
* ``residual_ci``: residualise one-hot/z-scored blocks on the conditioning
  set and test the residual blocks with Pillai's trace and its F
  approximation.

All tests return ``independent = p_value > alpha``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import special

from .data.table import ColumnSchema, DataTable
from .errors import SchemaError

DEFAULT_ALPHA = 0.01
MIN_STRATUM_ROWS = 5
CORR_CLIP = 1.0 - 1e-12
RIDGE = 1e-8


class TestKind(str, enum.Enum):
    __test__ = False  # keep pytest from collecting this

    CHI_SQUARE = "chi_square"
    PARTIAL_CORRELATION = "partial_correlation"
    RESIDUALISATION = "residualisation"


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    dof: float
    p_value: float
    independent: bool
    test_kind: TestKind
    details: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if not math.isfinite(self.statistic):
            raise ValueError("statistic must be finite")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _columns(table: DataTable, names: Sequence[str], categorical: Optional[bool]) -> None:
    if len(table) == 0:
        raise SchemaError("CI test on an empty table")
    for name in names:
        spec = table.spec(name)
        if categorical is not None and spec.is_categorical != categorical:
            kind = "categorical" if categorical else "numeric"
            raise SchemaError(f"column must be {kind}", column=name)
        if table.missing_mask(name).any():
            raise SchemaError("CI tests need complete columns", column=name)


def _prepare(x: str, y: str, z: Iterable[str]) -> tuple[str, ...]:
    z = tuple(z)
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("conditioning set contains x or y")
    return z


def chi_square_p_value(statistic: float, dof: float) -> float:
    """Upper tail of the chi-square distribution via the regularised gamma function."""
    if dof <= 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, statistic / 2.0))


def _strata(table: DataTable, z: Sequence[str], min_rows: int) -> tuple[np.ndarray, int]:
    n = len(table)
    if not z:
        return np.zeros(n, dtype=np.int64), 1
    codes = [table.column(v) for v in z]
    cards = [len(table.spec(v).categories) for v in z]
    if math.prod(cards) < 2**62:
        flat = np.ravel_multi_index(codes, cards)
        _, inverse = np.unique(flat, return_inverse=True)
    else:
        _, inverse = np.unique(np.column_stack(codes), axis=0, return_inverse=True)
    inverse = inverse.ravel()
    sizes = np.bincount(inverse)
    if min_rows > 0:
        small = sizes < min_rows
        if small.any():
            # merge every small stratum into one pooled stratum
            remap = np.cumsum(~small) - 1
            pooled = int((~small).sum())
            remap = np.where(small, pooled, remap)
            inverse = remap[inverse]
            return inverse, pooled + 1
    return inverse, len(sizes)


def chi_square_ci(
    table: DataTable,
    x: str,
    y: str,
    z: Iterable[str] = (),
    alpha: float = DEFAULT_ALPHA,
    min_stratum_rows: int = MIN_STRATUM_ROWS,
) -> CiTestResult:
    z = _prepare(x, y, z)
    _check_alpha(alpha)
    _columns(table, (x, y, *z), categorical=True)
    kx = len(table.spec(x).categories)
    ky = len(table.spec(y).categories)
    strata, n_strata = _strata(table, z, min_stratum_rows)
    flat = (strata * kx + table.column(x)) * ky + table.column(y)
    counts = np.bincount(flat, minlength=n_strata * kx * ky).reshape(n_strata, kx, ky).astype(float)

    row = counts.sum(axis=2)
    col = counts.sum(axis=1)
    tot = row.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = row[:, :, None] * col[:, None, :] / tot[:, None, None]
        terms = np.where(expected > 0, (counts - expected) ** 2 / expected, 0.0)
    r = (row > 0).sum(axis=1)
    c = (col > 0).sum(axis=1)
    live = (r > 1) & (c > 1)
    stat = float(terms[live].sum())
    dof = float(((r - 1) * (c - 1))[live].sum())
    p = chi_square_p_value(stat, dof)
    return CiTestResult(stat, dof, p, p > alpha, TestKind.CHI_SQUARE, {"strata": float(n_strata)})


def _design(table: DataTable, z: Sequence[str]) -> np.ndarray:
    cols = [np.ones(len(table))]
    for v in z:
        cols.append(_encode(table, v, drop_first=True))
    return np.column_stack(cols)


def _encode(table: DataTable, name: str, drop_first: bool) -> np.ndarray:
    """z-scored numeric column or one-hot block of the observed categories."""
    arr = table.column(name)
    if not table.spec(name).is_categorical:
        std = arr.std()
        return ((arr - arr.mean()) / (std if std > 0 else 1.0))[:, None]
    present = np.flatnonzero(np.bincount(arr, minlength=len(table.spec(name).categories)))
    onehot = (arr[:, None] == present[None, :]).astype(float)
    return onehot[:, 1:] if drop_first else onehot


def _residualise(design: np.ndarray, block: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    if ridge > 0:
        gram = design.T @ design
        gram[np.diag_indices_from(gram)] += ridge
        coef = np.linalg.solve(gram, design.T @ block)
    else:
        coef, *_ = np.linalg.lstsq(design, block, rcond=None)
    return block - design @ coef


def partial_corr_ci(
    table: DataTable,
    x: str,
    y: str,
    z: Iterable[str] = (),
    alpha: float = DEFAULT_ALPHA,
) -> CiTestResult:
    z = _prepare(x, y, z)
    _check_alpha(alpha)
    _columns(table, (x, y, *z), categorical=False)
    n = len(table)
    if n <= len(z) + 3:
        raise SchemaError(f"partial correlation needs more than {len(z) + 3} rows, got {n}")
    design = np.column_stack([np.ones(n)] + [table.column(v) for v in z])
    res = _residualise(design, np.column_stack([table.column(x), table.column(y)]))
    rx, ry = res[:, 0], res[:, 1]
    sx, sy = np.sqrt(rx @ rx), np.sqrt(ry @ ry)
    flat_x = sx <= 1e-10 * np.linalg.norm(table.column(x) - table.column(x).mean())
    flat_y = sy <= 1e-10 * np.linalg.norm(table.column(y) - table.column(y).mean())
    if flat_x and flat_y:
        raise SchemaError(f"both {x!r} and {y!r} are fully explained by the conditioning set")
    r = 0.0 if (flat_x or flat_y) else float(np.clip(rx @ ry / (sx * sy), -CORR_CLIP, CORR_CLIP))
    dof = n - len(z) - 3
    stat = math.sqrt(dof) * math.atanh(r)
    p = float(min(1.0, 2.0 * special.ndtr(-abs(stat))))
    return CiTestResult(stat, float(dof), p, p > alpha, TestKind.PARTIAL_CORRELATION, {"r": r})


def _orthonormal_basis(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the residual block's column space.

    Encoded columns have norm of order sqrt(n), so directions with singular
    value below 1e-6 * sqrt(n) are residualisation round-off and dropped.
    """
    if block.shape[1] == 0:
        return block
    u, s, _ = np.linalg.svd(block, full_matrices=False)
    return u[:, s > 1e-6 * np.sqrt(block.shape[0])]


def residual_ci(
    table: DataTable,
    x: str,
    y: str,
    z: Iterable[str] = (),
    alpha: float = DEFAULT_ALPHA,
    ridge: float = RIDGE,
) -> CiTestResult:
    z = _prepare(x, y, z)
    _check_alpha(alpha)
    _columns(table, (x, y, *z), categorical=None)
    n = len(table)
    design = _design(table, z)
    if n <= design.shape[1] - 1 + 3:
        raise SchemaError(f"residualisation test needs more than {design.shape[1] + 2} rows, got {n}")
    bx = _encode(table, x, drop_first=True)
    by = _encode(table, y, drop_first=True)
    ux = _orthonormal_basis(_residualise(design, bx, ridge))
    uy = _orthonormal_basis(_residualise(design, by, ridge))
    p_x, p_y = ux.shape[1], uy.shape[1]
    k_z = np.linalg.matrix_rank(design)
    if p_x == 0 or p_y == 0:
        return CiTestResult(0.0, 0.0, 1.0, True, TestKind.RESIDUALISATION, {"pillai": 0.0})
    canon = np.clip(np.linalg.svd(ux.T @ uy, compute_uv=False), 0.0, CORR_CLIP)
    s = min(p_x, p_y)
    pillai = float(np.sum(canon**2))
    df1 = float(p_x * p_y)
    df2 = float(s * (n - k_z - max(p_x, p_y)))
    if df2 <= 0:
        raise SchemaError("not enough rows for the residualisation F approximation")
    stat = (df2 / df1) * pillai / (s - pillai)
    p = float(special.fdtrc(df1, df2, stat))
    return CiTestResult(stat, df1, p, p > alpha, TestKind.RESIDUALISATION, {"pillai": pillai, "df2": df2})


def select_test(schema: Sequence[ColumnSchema] | DataTable, x: str, y: str, z: Iterable[str] = ()) -> TestKind:
    if isinstance(schema, DataTable):
        lookup = {c.name: c for c in schema.schema}
    else:
        lookup = {c.name: c for c in schema}
    names = (x, y, *z)
    for v in names:
        if v not in lookup:
            raise SchemaError("no such column", column=v)
    cats = [lookup[v].is_categorical for v in names]
    if all(cats):
        return TestKind.CHI_SQUARE
    if not any(cats):
        return TestKind.PARTIAL_CORRELATION
    return TestKind.RESIDUALISATION


_DISPATCH = {
    TestKind.CHI_SQUARE: chi_square_ci,
    TestKind.PARTIAL_CORRELATION: partial_corr_ci,
    TestKind.RESIDUALISATION: residual_ci,
}


def ci_test(
    table: DataTable,
    x: str,
    y: str,
    z: Iterable[str] = (),
    alpha: float = DEFAULT_ALPHA,
    kind: Optional[TestKind] = None,
) -> CiTestResult:
    """Run the test appropriate for the column kinds of ``x``, ``y`` and ``z``."""
    z = tuple(z)
    kind = kind or select_test(table, x, y, z)
    return _DISPATCH[TestKind(kind)](table, x, y, z, alpha)


__all__ = [
    "CiTestResult",
    "DEFAULT_ALPHA",
    "TestKind",
    "chi_square_ci",
    "chi_square_p_value",
    "ci_test",
    "partial_corr_ci",
    "residual_ci",
    "select_test",
]
