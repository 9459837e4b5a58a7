"""DAGs, d-separation, CPDAGs and ground-truth conditional-independence sets."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import GraphError, UnknownVariableError

Edge = tuple[str, str]


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named variables.

    ``nodes`` keeps declaration order; ``edges`` holds ``(parent, child)``
    pairs. Construction validates endpoints, self-loops and acyclicity.
    """

    nodes: tuple[str, ...]
    edges: frozenset[Edge] = frozenset()
    _parents: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _children: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        edges = frozenset((str(a), str(b)) for a, b in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        if len(set(nodes)) != len(nodes):
            raise GraphError("duplicate node names")
        for v in nodes:
            if not isinstance(v, str) or not v:
                raise GraphError(f"node names must be non-empty strings, got {v!r}")
        known = set(nodes)
        parents: dict[str, list[str]] = {v: [] for v in nodes}
        children: dict[str, list[str]] = {v: [] for v in nodes}
        for a, b in sorted(edges):
            for end in (a, b):
                if end not in known:
                    raise UnknownVariableError(end, "edge list")
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            parents[b].append(a)
            children[a].append(b)
        object.__setattr__(self, "_parents", {v: tuple(ps) for v, ps in parents.items()})
        object.__setattr__(self, "_children", {v: tuple(cs) for v, cs in children.items()})
        cycle = _find_cycle(nodes, self._children)
        if cycle:
            raise GraphError("graph has a cycle: " + " -> ".join(cycle))

    def parents(self, v: str) -> tuple[str, ...]:
        self._check(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self._check(v)
        return self._children[v]

    def ancestors(self, vs: Iterable[str]) -> set[str]:
        """Return ``vs`` together with all of their ancestors."""
        out: set[str] = set()
        stack = list(vs)
        while stack:
            v = stack.pop()
            if v in out:
                continue
            self._check(v)
            out.add(v)
            stack.extend(self._parents[v])
        return out

    def descendants(self, v: str) -> set[str]:
        out: set[str] = set()
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self.children(u):
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.edges)

    def v_structures(self) -> frozenset[tuple[str, str, str]]:
        """Unshielded colliders as ``(a, c, b)`` with ``a < b`` and ``a -> c <- b``."""
        adj = self.skeleton()
        out = set()
        for c in self.nodes:
            for a, b in combinations(sorted(self._parents[c]), 2):
                if frozenset((a, b)) not in adj:
                    out.add((a, c, b))
        return frozenset(out)

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm with lexicographic tie-breaking."""
        indeg = {v: len(self._parents[v]) for v in self.nodes}
        heap = [v for v, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        return tuple(order)

    def _check(self, v: str) -> None:
        if v not in self._parents:
            raise UnknownVariableError(v)


def _find_cycle(nodes: Iterable[str], children: Mapping[str, Iterable[str]]) -> list[str]:
    """Return one directed cycle as a node list (first node repeated at the end), or []."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {v: WHITE for v in nodes}
    for root in nodes:
        if colour[root] != WHITE:
            continue
        path = [root]
        iters = [iter(children[root])]
        colour[root] = GREY
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                colour[path.pop()] = BLACK
                iters.pop()
            elif colour[nxt] == GREY:
                return path[path.index(nxt):] + [nxt]
            elif colour[nxt] == WHITE:
                colour[nxt] = GREY
                path.append(nxt)
                iters.append(iter(children[nxt]))
    return []


@dataclass(frozen=True)
class Cpdag:
    nodes: tuple[str, ...]
    directed_edges: frozenset[Edge] = frozenset()
    undirected_edges: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "directed_edges", frozenset(tuple(e) for e in self.directed_edges))
        und = frozenset(frozenset(e) for e in self.undirected_edges)
        object.__setattr__(self, "undirected_edges", und)
        if any(len(e) != 2 for e in und):
            raise GraphError("undirected edges need two distinct endpoints")
        if {frozenset(e) for e in self.directed_edges} & und:
            raise GraphError("an adjacency is both directed and undirected")
        # acyclicity of the directed part
        Dag(self.nodes, self.directed_edges)

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.directed_edges) | self.undirected_edges


def is_d_separated(dag: Dag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """Test whether ``x`` and ``y`` are d-separated by ``z`` in ``dag``.

    Uses the reachability ("Bayes-ball") formulation: collect every node
    reachable from ``x`` along an active trail given ``z`` and check
    whether ``y`` is among them.
    """
    z = set(z)
    for v in (x, y, *z):
        dag._check(v)
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("x and y must not be in the conditioning set")

    anc_z = dag.ancestors(z)
    visited: set[tuple[str, bool]] = set()
    # (node, arrived_from_child); x is entered as if coming from a child
    stack: list[tuple[str, bool]] = [(x, True)]
    while stack:
        node, up = stack.pop()
        if (node, up) in visited:
            continue
        visited.add((node, up))
        if node == y:
            return False
        observed = node in z
        if up and not observed:
            stack.extend((p, True) for p in dag._parents[node])
            stack.extend((c, False) for c in dag._children[node])
        elif not up:
            if not observed:
                stack.extend((c, False) for c in dag._children[node])
            if node in anc_z:
                stack.extend((p, True) for p in dag._parents[node])
    return True


def _edge_order(dag: Dag) -> list[Edge]:
    rank = {v: i for i, v in enumerate(dag.topological_order())}
    # lowest child first; within a child, the highest-ranked parent first
    return sorted(dag.edges, key=lambda e: (rank[e[1]], -rank[e[0]]))


def to_cpdag(dag: Dag) -> Cpdag:
    """Completed PDAG of the Markov equivalence class of ``dag``.

    Labels every edge compelled or reversible by walking a total edge
    order; compelled edges stay directed, reversible ones become
    undirected.
    """
    order = _edge_order(dag)
    parents = {v: set(dag._parents[v]) for v in dag.nodes}
    label: dict[Edge, str] = {}

    def label_into(y: str, kind: str) -> None:
        for p in parents[y]:
            label.setdefault((p, y), kind)

    for x, y in order:
        if (x, y) in label:
            continue
        done = False
        for w in sorted(parents[x]):
            if label.get((w, x)) != "compelled":
                continue
            if w not in parents[y]:
                label[(x, y)] = "compelled"
                label_into(y, "compelled")
                done = True
                break
            label[(w, y)] = "compelled"
        if done:
            continue
        if any(zz != x and zz not in parents[x] for zz in parents[y]):
            label[(x, y)] = "compelled"
            label_into(y, "compelled")
        else:
            label[(x, y)] = "reversible"
            label_into(y, "reversible")

    directed = frozenset(e for e, k in label.items() if k == "compelled")
    undirected = frozenset(frozenset(e) for e, k in label.items() if k == "reversible")
    return Cpdag(dag.nodes, directed, undirected)


def markov_equivalent(a: Dag, b: Dag) -> bool:
    if set(a.nodes) != set(b.nodes):
        raise GraphError("Markov equivalence needs identical node sets")
    return a.skeleton() == b.skeleton() and a.v_structures() == b.v_structures()


class Level(str, enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True, order=True)
class CiStatement:
    """``x`` independent of ``y`` given ``z``; ``label`` is True for independence."""

    x: str
    y: str
    z: tuple[str, ...]
    label: bool = field(compare=False, default=False)

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError("x and y must differ")
        object.__setattr__(self, "z", tuple(sorted(self.z)))
        if self.x in self.z or self.y in self.z:
            raise ValueError("conditioning set contains x or y")

    @property
    def key(self) -> tuple[str, str, tuple[str, ...]]:
        a, b = sorted((self.x, self.y))
        return a, b, self.z


@dataclass(frozen=True)
class CiRelationSet:
    statements: tuple[CiStatement, ...]
    level: Level
    target: Optional[str]
    max_cond_size: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "statements", tuple(self.statements))
        if self.level is Level.LOCAL:
            if self.target is None:
                raise ValueError("local relation sets need a target")
            if any(self.target not in (s.x, s.y) for s in self.statements):
                raise ValueError("local statement does not mention the target")
        if any(len(s.z) > self.max_cond_size for s in self.statements):
            raise ValueError("statement exceeds max_cond_size")
        keys = [s.key for s in self.statements]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate CI statements")

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.statements], dtype=bool)


def enumerate_ci_relations(
    dag: Dag,
    target: Optional[str] = None,
    level: Level | str = Level.GLOBAL,
    max_cond_size: int = 2,
    cap: Optional[int] = None,
    seed: int = 0,
) -> CiRelationSet:
    """Enumerate d-separation-labelled CI statements up to a conditioning-set size.

    Pairs are unordered (``x < y`` by name); for the local level only pairs
    involving ``target`` are kept. When ``cap`` is given and exceeded, a
    label-stratified uniform subsample of ``cap`` statements is returned,
    still in canonical order.
    """
    level = Level(level)
    if max_cond_size < 0:
        raise ValueError("max_cond_size must be non-negative")
    if level is Level.LOCAL:
        if target is None:
            raise ValueError("local enumeration requires a target")
        dag._check(target)
    k = min(max_cond_size, max(len(dag.nodes) - 2, 0))
    names = sorted(dag.nodes)
    out = []
    for x, y in combinations(names, 2):
        if level is Level.LOCAL and target not in (x, y):
            continue
        rest = [v for v in names if v != x and v != y]
        for size in range(k + 1):
            for z in combinations(rest, size):
                out.append(CiStatement(x, y, z, is_d_separated(dag, x, y, z)))
    out.sort()
    if cap is not None and len(out) > cap:
        out = _stratified_subsample(out, cap, seed)
    return CiRelationSet(tuple(out), level, target, max_cond_size)


def _stratified_subsample(stmts: list[CiStatement], cap: int, seed: int) -> list[CiStatement]:
    labels = np.array([s.label for s in stmts])
    ind = np.flatnonzero(labels)
    dep = np.flatnonzero(~labels)
    n_ind = int(round(cap * len(ind) / len(stmts)))
    n_ind = min(max(n_ind, 1 if len(ind) else 0), len(ind))
    n_dep = min(cap - n_ind, len(dep))
    rng = np.random.default_rng(seed)
    keep = np.concatenate([
        rng.choice(ind, size=n_ind, replace=False),
        rng.choice(dep, size=n_dep, replace=False),
    ])
    return [stmts[i] for i in sorted(keep.tolist())]
