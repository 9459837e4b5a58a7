"""Discrete Bayesian network: hill-climbing structure search, BIC score,
Laplace-smoothed maximum-likelihood CPTs, and sampling with de-binning."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..data.table import DataTable
from ..errors import SchemaError
from ..graph import Dag
from ..scm.model import DiscreteCpd, ScmModel, Task
from ..scm.sampling import prior_sample
from .request import GenRequest, rng_for

SCORE_TOL = 1e-9
REJECTION_FACTOR = 200  # rejection budget: this many draws per requested row


@dataclass(frozen=True)
class BnFitConfig:
    score: str = "bic"
    max_parents: int = 3
    max_iters: int = 1000
    numeric_bins: int = 8

    def __post_init__(self) -> None:
        if self.score != "bic":
            raise ValueError(f"unsupported score {self.score!r}")
        if self.max_parents < 0:
            raise ValueError("max_parents must be non-negative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.numeric_bins < 2:
            raise ValueError("numeric_bins must be at least 2")


@dataclass(frozen=True)
class Discretised:
    codes: dict[str, np.ndarray]
    states: dict[str, tuple[str, ...]]
    edges: dict[str, tuple[float, ...]]  # full edges (min, inner..., max) of binned columns


def discretise(train: DataTable, n_bins: int) -> Discretised:
    """Quantile-bin numeric columns; impute missing cells with the mode state."""
    codes, states, edges = {}, {}, {}
    for name in train.names:
        spec = train.spec(name)
        col = train.column(name)
        missing = train.missing_mask(name)
        if missing.all():
            raise SchemaError("column is entirely missing", column=name)
        if spec.is_categorical:
            c = col.copy()
            states[name] = spec.categories
        else:
            vals = col[~missing]
            inner = np.unique(np.quantile(vals, np.arange(1, n_bins) / n_bins))
            inner = inner[(inner > vals.min()) & (inner <= vals.max())]
            c = np.searchsorted(inner, np.where(missing, vals[0], col), side="right")
            states[name] = tuple(f"bin{i}" for i in range(len(inner) + 1))
            edges[name] = (float(vals.min()), *map(float, inner), float(vals.max()))
        if missing.any():
            mode = np.argmax(np.bincount(c[~missing], minlength=len(states[name])))
            c = np.where(missing, mode, c)
        codes[name] = c.astype(np.int64)
    return Discretised(codes, states, edges)


class _FamilyScorer:
    """Cached BIC of (node, parent set) families."""

    def __init__(self, d: Discretised, order: tuple[str, ...]):
        self.codes = d.codes
        self.card = {v: len(d.states[v]) for v in order}
        self.n = len(next(iter(d.codes.values())))
        self.order = {v: i for i, v in enumerate(order)}
        self.cache: dict[tuple[str, tuple[str, ...]], float] = {}

    def counts(self, v: str, parents: tuple[str, ...]) -> np.ndarray:
        idx = np.zeros(self.n, dtype=np.int64)
        q = 1
        for p in parents:
            idx = idx * self.card[p] + self.codes[p]
            q *= self.card[p]
        flat = idx * self.card[v] + self.codes[v]
        return np.bincount(flat, minlength=q * self.card[v]).reshape(q, self.card[v])

    def __call__(self, v: str, parents) -> float:
        key = (v, tuple(sorted(parents, key=self.order.__getitem__)))
        if key not in self.cache:
            n_ijk = self.counts(v, key[1]).astype(float)
            n_ij = n_ijk.sum(axis=1, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                ll = float(np.sum(np.where(n_ijk > 0, n_ijk * np.log(n_ijk / n_ij), 0.0)))
            k = n_ijk.shape[0] * (self.card[v] - 1)
            self.cache[key] = ll - 0.5 * math.log(self.n) * k
        return self.cache[key]


def _reaches(children: dict[str, set[str]], src: str, dst: str, skip: Optional[tuple[str, str]] = None) -> bool:
    stack, seen = [src], {src}
    while stack:
        u = stack.pop()
        for w in children[u]:
            if (u, w) == skip:
                continue
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def hill_climb(scorer: _FamilyScorer, nodes: tuple[str, ...], cfg: BnFitConfig):
    """Greedy add/remove/reverse search from the empty graph.

    Every iteration applies the single best-improving move; ties go to the
    first move in ``(operation, parent, child)`` lexicographic order with
    operations ordered add < remove < reverse.
    """
    parents: dict[str, set[str]] = {v: set() for v in nodes}
    children: dict[str, set[str]] = {v: set() for v in nodes}
    total = sum(scorer(v, ()) for v in nodes)
    trace = [total]
    names = sorted(nodes)
    converged = False
    for _ in range(cfg.max_iters):
        best, best_delta = None, SCORE_TOL
        for u in names:
            for v in names:
                if u == v:
                    continue
                if v in children[u]:
                    moves = ["remove", "reverse"]
                elif u in children[v]:
                    continue
                else:
                    moves = ["add"]
                for op in moves:
                    if op == "add":
                        if len(parents[v]) >= cfg.max_parents or _reaches(children, v, u):
                            continue
                        delta = scorer(v, parents[v] | {u}) - scorer(v, parents[v])
                    elif op == "remove":
                        delta = scorer(v, parents[v] - {u}) - scorer(v, parents[v])
                    else:
                        if len(parents[u]) >= cfg.max_parents or _reaches(children, u, v, skip=(u, v)):
                            continue
                        delta = (scorer(v, parents[v] - {u}) - scorer(v, parents[v])
                                 + scorer(u, parents[u] | {v}) - scorer(u, parents[u]))
                    key = (("add", "remove", "reverse").index(op), u, v)
                    if delta > best_delta or (best is not None and delta == best_delta and key < best[0]):
                        best, best_delta = (key, op, u, v), delta
        if best is None:
            converged = True
            break
        _, op, u, v = best
        if op in ("remove", "reverse"):
            parents[v].discard(u)
            children[u].discard(v)
        if op == "add":
            parents[v].add(u)
            children[u].add(v)
        elif op == "reverse":
            parents[u].add(v)
            children[v].add(u)
        new_total = sum(scorer(w, parents[w]) for w in nodes)
        if new_total < total - 1e-6:
            raise AssertionError("BIC decreased during hill climbing")
        total = new_total
        trace.append(total)
    return parents, converged, trace


def bn_fit(train: DataTable, cfg: BnFitConfig = BnFitConfig(), seed: int = 0) -> ScmModel:
    """Learn a discrete Bayesian network for ``train``.

    Numeric columns become binned categoricals whose bin edges are recorded
    in ``bin_edges``. The search itself is deterministic; ``seed`` is kept in
    the model's ``info`` for provenance.
    """
    if len(train) == 0:
        raise SchemaError("training table is empty")
    nodes = train.names
    d = discretise(train, cfg.numeric_bins)
    scorer = _FamilyScorer(d, nodes)
    parents, converged, trace = hill_climb(scorer, nodes, cfg)
    if not converged:
        warnings.warn("hill climbing stopped at max_iters before converging", RuntimeWarning, stacklevel=2)
    cpds = []
    for v in nodes:
        ps = tuple(p for p in nodes if p in parents[v])
        n_ijk = scorer.counts(v, ps).astype(float) + 1.0
        cpds.append(DiscreteCpd(v, d.states[v], ps, n_ijk / n_ijk.sum(axis=1, keepdims=True)))
    edges = {(p, v) for v in nodes for p in parents[v]}
    task = None
    if train.target is not None:
        task = Task.CLASSIFICATION if train.is_classification else Task.REGRESSION
    return ScmModel(
        Dag(nodes, edges),
        {c.variable: c for c in cpds},
        target=train.target,
        task=task,
        name="bayes_net",
        bin_edges=d.edges,
        info={"converged": converged, "bic_trace": trace, "seed": seed},
    )


def _debin(model: ScmModel, codes: dict[str, np.ndarray], seed: int) -> dict[str, np.ndarray]:
    rng = rng_for(seed, 2)
    out = dict(codes)
    for v in model.nodes:
        if v in model.bin_edges:
            edges = np.asarray(model.bin_edges[v])
            c = codes[v]
            lo, hi = edges[c], edges[c + 1]
            out[v] = lo + rng.random(len(c)) * (hi - lo)
    return out


def bn_generate(model: ScmModel, req: GenRequest) -> DataTable:
    """Sample ``req.n_syn`` rows; stratified requests use rejection on the target.

    Rows are drawn in blocks of consecutive counter positions, so the result
    is a deterministic function of the model and ``req.seed``.
    """
    train = req.train
    names = train.names
    if set(names) != set(model.nodes):
        raise SchemaError("model variables differ from the training columns")
    n = req.n_syn
    if req.stratify:
        target = train.target
        want = req.class_counts()
        got: list[list[np.ndarray]] = [[] for _ in want]
        have = np.zeros_like(want)
        start, budget = 0, REJECTION_FACTOR * n
        while (have < want).any():
            if start >= budget:
                short = int(np.flatnonzero(have < want)[0])
                label = train.spec(target).categories[short]
                raise SchemaError(f"class {label!r} not reached within {budget} rejection draws", column=target)
            block = max(n, 1024)
            draw = prior_sample(model, block, req.seed, start=start)
            y = draw.column(target)
            for c in np.flatnonzero(have < want):
                rows = np.flatnonzero(y == c)[: want[c] - have[c]]
                if len(rows):
                    got[c].append(draw.take(rows))
                    have[c] += len(rows)
            start += block
        parts = [t for per_class in got for t in per_class]
        codes = {v: np.concatenate([t.column(v) for t in parts]) for v in names}
        perm = rng_for(req.seed, 3).permutation(n)
        codes = {v: c[perm] for v, c in codes.items()}
    else:
        draw = prior_sample(model, n, req.seed)
        codes = {v: draw.column(v) for v in names}
    values = _debin(model, codes, req.seed)
    cols = {}
    for v in names:
        spec = train.spec(v)
        if spec.is_categorical:
            if model.states(v) != spec.categories:
                raise SchemaError("model states differ from the declared categories", column=v)
            cols[v] = values[v].astype(np.int64)
        else:
            if v not in model.bin_edges:
                raise SchemaError("numeric column has no bin edges in the model", column=v)
            cols[v] = values[v].astype(np.float64)
    return DataTable(train.schema, cols, train.target, "bayes_net")


def gen_bayes_net(req: GenRequest, cfg: BnFitConfig = BnFitConfig()) -> DataTable:
    return bn_generate(bn_fit(req.train, cfg, req.seed), req)


__all__ = [
    "BnFitConfig",
    "bn_fit",
    "bn_generate",
    "discretise",
    "gen_bayes_net",
    "hill_climb",
]
