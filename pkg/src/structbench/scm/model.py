"""Structural causal models with discrete (CPT) and conditional linear-Gaussian nodes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from ..data.table import ColumnSchema
from ..errors import ValidationError
from ..graph import Dag

ROW_TOL = 1e-9


class Task(str, enum.Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteCpd:
    """Conditional probability table.

    ``table`` has one row per joint parent configuration, enumerated in
    row-major order over ``parents`` (last parent varies fastest), and one
    column per state. A numeric parent enters through ``bins``: its value is
    mapped to ``searchsorted(thresholds, value, side="right")``.
    """

    variable: str
    states: tuple[str, ...]
    parents: tuple[str, ...]
    table: np.ndarray
    bins: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "bins", {p: tuple(float(t) for t in ts) for p, ts in self.bins.items()})
        table = _frozen_array(self.table, 2)
        object.__setattr__(self, "table", table)
        if not self.states:
            raise ValidationError("needs at least one state", self.variable)
        if len(set(self.states)) != len(self.states):
            raise ValidationError("duplicate states", self.variable)
        if table.shape[1] != len(self.states):
            raise ValidationError(f"table has {table.shape[1]} columns for {len(self.states)} states", self.variable)
        if not np.all(np.isfinite(table)) or (table < 0).any() or (table > 1).any():
            raise ValidationError("probabilities must lie in [0, 1]", self.variable)
        sums = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1) > ROW_TOL)
        if len(bad):
            raise ValidationError(f"row {int(bad[0])} sums to {sums[bad[0]]:.12g}, not 1", self.variable)
        for p, ts in self.bins.items():
            if p not in self.parents:
                raise ValidationError(f"bins declared for non-parent {p!r}", self.variable)
            if list(ts) != sorted(ts):
                raise ValidationError(f"bin thresholds for {p!r} must be sorted", self.variable)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteCpd):
            return NotImplemented
        return (
            self.variable == other.variable
            and self.states == other.states
            and self.parents == other.parents
            and dict(self.bins) == dict(other.bins)
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class LinearMechanism:
    intercept: float
    weights: tuple[float, ...]
    noise_std: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "noise_std", float(self.noise_std))
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise ValidationError(f"noise_std must be finite and >= 0, got {self.noise_std}")
        if not np.isfinite(self.intercept) or not all(np.isfinite(self.weights)):
            raise ValidationError("weights and intercept must be finite")


@dataclass(frozen=True)
class LinearGaussianCpd:
    """``value = intercept + weights . numeric_parents + noise_std * N(0, 1)``.

    With discrete parents, ``configs`` holds one :class:`LinearMechanism`
    per discrete-parent configuration (row-major, last discrete parent
    fastest) and the top-level coefficients are unused.
    """

    variable: str
    parents: tuple[str, ...]
    weights: tuple[float, ...] = ()
    intercept: float = 0.0
    noise_std: float = 1.0
    discrete_parents: tuple[str, ...] = ()
    configs: tuple[LinearMechanism, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "discrete_parents", tuple(self.discrete_parents))
        object.__setattr__(self, "configs", tuple(self.configs))
        try:
            base = LinearMechanism(self.intercept, self.weights, self.noise_std)
        except ValidationError as exc:
            raise ValidationError(str(exc), self.variable) from None
        object.__setattr__(self, "weights", base.weights)
        object.__setattr__(self, "intercept", base.intercept)
        object.__setattr__(self, "noise_std", base.noise_std)
        if set(self.discrete_parents) - set(self.parents):
            raise ValidationError("discrete_parents must be a subset of parents", self.variable)
        n_cont = len(self.continuous_parents)
        if self.discrete_parents:
            if not self.configs:
                raise ValidationError("discrete parents need per-configuration mechanisms", self.variable)
            for i, m in enumerate(self.configs):
                if len(m.weights) != n_cont:
                    raise ValidationError(f"configs[{i}] has {len(m.weights)} weights for {n_cont} numeric parents", self.variable)
        elif len(self.weights) != len(self.parents):
            raise ValidationError(f"{len(self.weights)} weights for {len(self.parents)} parents", self.variable)

    @property
    def continuous_parents(self) -> tuple[str, ...]:
        return tuple(p for p in self.parents if p not in self.discrete_parents)

    def mechanisms(self) -> tuple[LinearMechanism, ...]:
        if self.discrete_parents:
            return self.configs
        return (LinearMechanism(self.intercept, self.weights, self.noise_std),)


Cpd = Union[DiscreteCpd, LinearGaussianCpd]


@dataclass(frozen=True, eq=False)
class ScmModel:
    """A DAG with one conditional distribution per node.

    ``bin_edges`` marks discrete nodes that stand for binned numeric columns
    (state ``i`` covers ``[edges[i], edges[i+1]]``); ``info`` carries
    provenance such as fitting diagnostics and does not take part in
    equality.
    """

    dag: Dag
    cpds: Mapping[str, Cpd]
    target: Optional[str] = None
    task: Optional[Task] = None
    name: str = "scm"
    bin_edges: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task is not None:
            object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "bin_edges", {k: tuple(float(e) for e in v) for k, v in self.bin_edges.items()})
        if set(self.cpds) != set(self.dag.nodes):
            missing = sorted(set(self.dag.nodes) ^ set(self.cpds))
            raise ValidationError(f"cpds do not cover the node set: {missing}")
        object.__setattr__(self, "cpds", {v: self.cpds[v] for v in self.dag.nodes})
        for v in self.dag.nodes:
            cpd = self.cpds[v]
            if cpd.variable != v:
                raise ValidationError(f"cpd registered under {v!r} describes {cpd.variable!r}", v)
            if set(cpd.parents) != set(self.dag.parents(v)) or len(cpd.parents) != len(self.dag.parents(v)):
                raise ValidationError(f"cpd parents {list(cpd.parents)} differ from graph parents {sorted(self.dag.parents(v))}", v)
            if isinstance(cpd, DiscreteCpd):
                rows = 1
                for p in cpd.parents:
                    if self.is_discrete(p):
                        if p in cpd.bins:
                            raise ValidationError(f"bins given for discrete parent {p!r}", v)
                        rows *= len(self.states(p))
                    else:
                        if p not in cpd.bins:
                            raise ValidationError(f"numeric parent {p!r} needs bin thresholds", v)
                        rows *= len(cpd.bins[p]) + 1
                if cpd.table.shape[0] != rows:
                    raise ValidationError(f"table has {cpd.table.shape[0]} rows, expected {rows}", v)
            else:
                for p in cpd.parents:
                    if (p in cpd.discrete_parents) != self.is_discrete(p):
                        raise ValidationError(f"parent {p!r} kind does not match discrete_parents", v)
                if cpd.discrete_parents:
                    rows = int(np.prod([len(self.states(p)) for p in cpd.discrete_parents]))
                    if len(cpd.configs) != rows:
                        raise ValidationError(f"{len(cpd.configs)} configs, expected {rows}", v)
        for k, edges in self.bin_edges.items():
            if not self.is_discrete(k) or len(edges) != len(self.states(k)) + 1:
                raise ValidationError("bin_edges must give len(states) + 1 edges of a discrete node", k)
        if self.target is not None:
            self.dag._check(self.target)
        if self.task is Task.CLASSIFICATION:
            if self.target is None or not self.is_discrete(self.target):
                raise ValidationError("classification needs a discrete target")

    @classmethod
    def from_cpds(cls, cpds: Sequence[Cpd], **kwargs) -> "ScmModel":
        nodes = tuple(c.variable for c in cpds)
        edges = {(p, c.variable) for c in cpds for p in c.parents}
        return cls(Dag(nodes, edges), {c.variable: c for c in cpds}, **kwargs)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.dag.nodes

    def is_discrete(self, v: str) -> bool:
        return isinstance(self.cpds[v], DiscreteCpd)

    def states(self, v: str) -> tuple[str, ...]:
        cpd = self.cpds[v]
        if not isinstance(cpd, DiscreteCpd):
            raise ValidationError("numeric node has no states", v)
        return cpd.states

    def schema(self, debinned: bool = True) -> list[ColumnSchema]:
        """Column schema of sampled data.

        With ``debinned`` (the default) binned nodes map back to numeric
        columns; otherwise they appear as categoricals over their bin states.
        """
        out = []
        for v in self.nodes:
            if self.is_discrete(v) and not (debinned and v in self.bin_edges):
                out.append(ColumnSchema.categorical(v, self.states(v)))
            else:
                out.append(ColumnSchema.numeric(v))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScmModel):
            return NotImplemented
        return (
            self.dag == other.dag
            and dict(self.cpds) == dict(other.cpds)
            and self.target == other.target
            and self.task == other.task
            and self.name == other.name
            and dict(self.bin_edges) == dict(other.bin_edges)
        )

    __hash__ = None  # type: ignore[assignment]


def parent_configurations(cards: Sequence[int]) -> list[tuple[int, ...]]:
    """All parent configurations in table-row order."""
    return list(product(*(range(k) for k in cards)))


def topological_order(dag: Dag) -> tuple[str, ...]:
    return dag.topological_order()
