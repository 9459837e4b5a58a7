"""SMOTE-style interpolation between training rows and their nearest neighbours."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..data.preprocess import fit_preprocessor
from ..data.table import DataTable
from ..errors import SchemaError
from .request import GenRequest, rng_for

DEFAULT_K = 5


def _neighbour_table(x: np.ndarray, groups: list[np.ndarray], k: int) -> np.ndarray:
    """``k`` nearest same-group neighbours (global row indices) of every row."""
    nbr = np.empty((len(x), k), dtype=np.int64)
    for rows in groups:
        _, idx = cKDTree(x[rows]).query(x[rows], k=k + 1)
        # drop the first hit: the row itself or an exact duplicate of it
        nbr[rows] = rows[idx.reshape(len(rows), k + 1)[:, 1:]]
    return nbr


def gen_smote(req: GenRequest, k: int = DEFAULT_K) -> DataTable:
    """Interpolate between a seed row and one of its ``k`` nearest neighbours.

    Neighbours are searched in the one-hot + z-score space, within the seed's
    class for classification tables and over all columns (target included)
    otherwise. Numeric cells take ``seed + u * (neighbour - seed)``;
    categorical cells copy the seed when ``u < 0.5`` and the neighbour
    otherwise.
    """
    if k < 1:
        raise ValueError("k must be positive")
    train = req.train
    n = len(train)
    classification = train.is_classification
    features = [c for c in train.names if not (classification and c == train.target)]
    x = fit_preprocessor(train, features).transform(train) if features else np.zeros((n, 1))

    if classification:
        target = train.column(train.target)
        cats = train.spec(train.target).categories
        codes = [c for c in range(len(cats)) if (target == c).any()]
        groups = [np.flatnonzero(target == c) for c in codes]
        for c, rows in zip(codes, groups):
            if len(rows) <= k:
                raise SchemaError(f"class {cats[c]!r} has {len(rows)} rows; SMOTE with k={k} needs more than {k}")
    else:
        if n <= k:
            raise SchemaError(f"SMOTE with k={k} needs more than {k} rows, got {n}")
        groups = [np.arange(n)]
    nbr = _neighbour_table(x, groups, k)

    rng = rng_for(req.seed, 1)
    if req.stratify:
        counts = req.class_counts()
        seeds = np.concatenate([
            rows[rng.integers(0, len(rows), counts[c])] for c, rows in zip(codes, groups)
        ])
        seeds = rng.permutation(seeds)
    else:
        seeds = rng.integers(0, n, req.n_syn)
    partners = nbr[seeds, rng.integers(0, k, len(seeds))]
    u = rng.random(len(seeds))

    cols = {}
    for name in train.names:
        col = train.column(name)
        a, b = col[seeds], col[partners]
        if train.spec(name).is_categorical:
            cols[name] = np.where(u < 0.5, a, b)
        else:
            mix = a + u * (b - a)
            cols[name] = np.where(np.isnan(a), b, np.where(np.isnan(b), a, mix))
    return DataTable(train.schema, cols, train.target, "smote")
