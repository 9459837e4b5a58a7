"""Train/validation/test splitting: 80/20 then 90/10, stratified for classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from ..errors import SchemaError
from .table import MISSING_CODE, DataTable

TEST_FRACTION = 0.2
VAL_FRACTION = 0.1


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        for name in ("train", "val", "test"):
            arr = np.sort(np.asarray(getattr(self, name), dtype=np.int64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "train": self.train.tolist(), "val": self.val.tolist(), "test": self.test.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitIndices":
        return cls(np.array(d["train"]), np.array(d["val"]), np.array(d["test"]), int(d["seed"]))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_sizes(n: int) -> tuple[int, int, int]:
    """Return ``(train, val, test)`` sizes for ``n`` rows."""
    n_test = _round_half_up(TEST_FRACTION * n)
    n_val = _round_half_up(VAL_FRACTION * (n - n_test))
    return n - n_test - n_val, n_val, n_test


def controlled_round(row_totals, col_totals) -> np.ndarray:
    """Integer matrix with the given margins whose cells are the floor or
    ceiling of ``row_i * col_j / total``.

    The rounding is solved as a max-flow problem, which always has a
    margin-preserving solution for two-way tables.
    """
    rows = np.asarray(row_totals, dtype=np.int64)
    cols = np.asarray(col_totals, dtype=np.int64)
    total = int(rows.sum())
    if total != int(cols.sum()):
        raise ValueError("row and column totals disagree")
    prod = np.outer(rows, cols)
    base = prod // total
    frac = (prod % total) > 0
    row_need = rows - base.sum(axis=1)
    col_need = cols - base.sum(axis=0)
    R, C = len(rows), len(cols)
    if row_need.sum() == 0:
        return base
    src, sink = 0, R + C + 1
    arcs = []
    for i in range(R):
        if row_need[i]:
            arcs.append((src, 1 + i, int(row_need[i])))
        arcs.extend((1 + i, 1 + R + j, 1) for j in range(C) if frac[i, j])
    arcs.extend((1 + R + j, sink, int(col_need[j])) for j in range(C) if col_need[j])
    u, v, cap = zip(*arcs)
    graph = csr_matrix((np.array(cap, dtype=np.int32), (u, v)), shape=(R + C + 2, R + C + 2))
    res = maximum_flow(graph, src, sink)
    if res.flow_value != row_need.sum():
        raise RuntimeError("controlled rounding failed")
    flow = res.flow.toarray()
    return base + np.clip(flow[1 : 1 + R, 1 + R : 1 + R + C], 0, None)


def split(table: DataTable, seed: int) -> SplitIndices:
    n = len(table)
    if n < 10:
        raise SchemaError(f"need at least 10 rows to split, got {n}")
    n_train, n_val, n_test = split_sizes(n)
    rng = np.random.default_rng(seed)

    if not table.is_classification:
        perm = rng.permutation(n)
        return SplitIndices(perm[n_test + n_val :], perm[n_test : n_test + n_val], perm[:n_test], seed)

    y = table.column(table.target)
    if (y == MISSING_CODE).any():
        raise SchemaError("cannot stratify on a target with missing cells", column=table.target)
    classes, counts = np.unique(y, return_counts=True)
    cats = table.spec(table.target).categories
    for c, k in zip(classes, counts):
        if k < 2:
            raise SchemaError(f"class {cats[c]!r} has a single row; cannot stratify", column=table.target)
    alloc = controlled_round(counts, [n_test, n_val, n_train])
    train, val, test = [], [], []
    for c, (k_test, k_val, _) in zip(classes, alloc):
        idx = rng.permutation(np.flatnonzero(y == c))
        test.append(idx[:k_test])
        val.append(idx[k_test : k_test + k_val])
        train.append(idx[k_test + k_val :])
    return SplitIndices(np.concatenate(train), np.concatenate(val), np.concatenate(test), seed)
