"""Prior (ancestral) sampling of SCMs with counter-based random streams.

Each node owns a Philox stream keyed by ``(seed, node_index)``; row ``i``
consumes exactly the ``i``-th 64-bit output of that stream. A row's value
therefore depends only on ``(seed, node, row)``, so any block of rows can be
generated independently (``start``) and reassembled bit-identically.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from ..data.table import DataTable
from .model import DiscreteCpd, ScmModel

_LANES = 4  # Philox4x64 emits four 64-bit words per counter increment


def uniform_stream(seed: int, node_index: int, start: int, n: int) -> np.ndarray:
    """Uniforms in (0, 1) for rows ``start .. start + n - 1`` of one node."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = np.random.SeedSequence([seed, node_index]).generate_state(2, np.uint64)
    bg = np.random.Philox(key=key)
    block, lane = divmod(start, _LANES)
    if block:
        bg.advance(block)
    raw = bg.random_raw(lane + n)[lane:]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _config_index(model: ScmModel, parents, bins, values, n) -> np.ndarray:
    idx = np.zeros(n, dtype=np.int64)
    for p in parents:
        if model.is_discrete(p):
            card, code = len(model.states(p)), values[p]
        else:
            thresholds = np.asarray(bins[p])
            card, code = len(thresholds) + 1, np.searchsorted(thresholds, values[p], side="right")
        idx = idx * card + code
    return idx


def prior_sample(model: ScmModel, n: int, seed: int, start: int = 0) -> DataTable:
    """Draw ``n`` i.i.d. rows by propagating root draws through the graph.

    Discrete nodes are returned as categorical columns (binned nodes keep
    their bin states), Gaussian nodes as numeric columns.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    index = {v: i for i, v in enumerate(model.nodes)}
    values: dict[str, np.ndarray] = {}
    for v in model.dag.topological_order():
        cpd = model.cpds[v]
        u = uniform_stream(seed, index[v], start, n)
        if isinstance(cpd, DiscreteCpd):
            rows = _config_index(model, cpd.parents, cpd.bins, values, n)
            cdf = np.cumsum(cpd.table, axis=1)[rows]
            state = (cdf <= u[:, None]).sum(axis=1)
            values[v] = np.minimum(state, len(cpd.states) - 1)
        else:
            mechs = cpd.mechanisms()
            cfg = _config_index(model, cpd.discrete_parents, {}, values, n)
            intercept = np.array([m.intercept for m in mechs])[cfg]
            noise = np.array([m.noise_std for m in mechs])[cfg]
            mean = intercept.copy()
            cont = cpd.continuous_parents
            if cont:
                w = np.array([m.weights for m in mechs])[cfg]
                mean += np.einsum("ij,ij->i", w, np.column_stack([values[p] for p in cont]))
            values[v] = mean + noise * ndtri(u)
    return DataTable(model.schema(debinned=False), values, target=model.target, source=model.name)
