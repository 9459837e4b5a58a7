"""Independent-marginal baseline: every column bootstrapped on its own."""

from __future__ import annotations

import numpy as np

from ..data.table import DataTable
from .request import GenRequest, rng_for


def gen_marginal(req: GenRequest) -> DataTable:
    """Resample each column independently from its training values.

    With stratification the class column is fixed to the apportioned counts
    and every other column is resampled within each class, so only the
    dependence on the class survives.
    """
    train = req.train
    rng = rng_for(req.seed, 0)
    n = req.n_syn
    cols: dict[str, np.ndarray] = {}
    if req.stratify:
        target = train.column(train.target)
        counts = req.class_counts()
        labels = rng.permutation(np.repeat(np.arange(len(counts)), counts))
        groups = {c: np.flatnonzero(target == c) for c in range(len(counts)) if counts[c]}
        for name in train.names:
            col = train.column(name)
            out = np.empty(n, dtype=col.dtype)
            for c, rows in groups.items():
                where = np.flatnonzero(labels == c)
                out[where] = col[rows[rng.integers(0, len(rows), len(where))]]
            cols[name] = out
    else:
        for name in train.names:
            col = train.column(name)
            cols[name] = col[rng.integers(0, len(col), n)]
    return DataTable(train.schema, cols, train.target, "marginal")
