"""Graphs, line graphs, Krausz partitions and root-graph reconstruction.

Vertices are dense integer indices ``0..n-1``. Edges are stored in canonical
``(min, max)`` form and sorted lexicographically, so every derived labeling
(in particular the edge -> line-graph-vertex bijection) is reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Hashable, Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph input."""


class RootGraphError(ValueError):
    """A clique partition cannot be turned into a bipartite root graph."""


class AmbiguousLabelingError(RootGraphError):
    """Two cliques from different classes share two or more vertices."""

    def __init__(self, a_index: int, b_index: int, shared: frozenset[int]):
        self.a_index = a_index
        self.b_index = b_index
        self.shared = shared
        super().__init__(
            f"cliques a[{a_index}] and b[{b_index}] share {len(shared)} vertices "
            f"{sorted(shared)}; the (a, b) labeling is ambiguous"
        )


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise GraphError(f"vertex count must be non-negative, got {self.n}")
        canon = set()
        for i, j in self.edges:
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside 0..{self.n - 1}")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edge_set

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adjacency[v]

    @cached_property
    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=int)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        if any(not 0 <= v < self.n for v in vs):
            return False
        edges = self.edge_set
        return all((min(u, v), max(u, v)) in edges for u, v in combinations(vs, 2))

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(_reachable(self._adjacency, 0)) == self.n


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with parts ``X = 0..x_count-1`` and ``Y = 0..y_count-1``.

    Edges are ``(x, y)`` pairs; both parts are indexed from zero.
    """

    x_count: int
    y_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.x_count < 1 or self.y_count < 1:
            raise GraphError("both parts of a bipartite graph need at least one vertex")
        for x, y in self.edges:
            if not (0 <= x < self.x_count and 0 <= y < self.y_count):
                raise GraphError(f"bipartite edge ({x}, {y}) out of range")
        object.__setattr__(self, "edges", tuple(sorted(set(map(tuple, self.edges)))))

    def biadjacency(self) -> np.ndarray:
        a = np.zeros((self.x_count, self.y_count), dtype=int)
        for x, y in self.edges:
            a[x, y] = 1
        return a

    def to_graph(self) -> Graph:
        """Flatten to a :class:`Graph` with ``X`` first, then ``Y`` offset by ``x_count``."""
        m = self.x_count
        return Graph(m + self.y_count, tuple((x, m + y) for x, y in self.edges))

    def is_connected(self) -> bool:
        return self.to_graph().is_connected()


@dataclass(frozen=True)
class EdgeBijection:
    """Labeling of root-graph edges by line-graph vertices.

    ``backward[k]`` is the edge labeled ``k``; ``forward`` is the inverse map.
    """

    backward: tuple[Hashable, ...]
    forward: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        fwd = {e: k for k, e in enumerate(self.backward)}
        if len(fwd) != len(self.backward):
            raise GraphError("edge bijection has repeated edges")
        object.__setattr__(self, "forward", fwd)

    def __len__(self) -> int:
        return len(self.backward)

    def __call__(self, edge) -> int:
        return self.forward[edge]

    def edge(self, k: int):
        return self.backward[k]


@dataclass(frozen=True)
class KrauszReport:
    violations: tuple[str, ...]
    two_colorable: bool
    coloring: tuple[int, ...] | None = None

    @property
    def valid(self) -> bool:
        return not self.violations


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a canonical graph; duplicate edges collapse, self-loops raise."""
    return Graph(int(n), tuple((int(i), int(j)) for i, j in edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(combinations(range(n), 2)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def line_graph(g: Graph | BipartiteGraph) -> tuple[Graph, EdgeBijection]:
    """Line graph and the edge labeling.

    For a :class:`BipartiteGraph` the bijection is keyed by ``(x, y)``; for a
    plain :class:`Graph` it is keyed by canonical ``(i, j)`` pairs. Either way
    labels follow the lexicographic order of the root edges.
    """
    if not g.edges:
        raise GraphError("line graph of an edgeless graph is empty")
    bij = EdgeBijection(tuple(g.edges))
    if isinstance(g, BipartiteGraph):
        ends = [(("x", x), ("y", y)) for x, y in g.edges]
    else:
        ends = list(g.edges)
    incident: dict = {}
    for k, (u, v) in enumerate(ends):
        incident.setdefault(u, []).append(k)
        incident.setdefault(v, []).append(k)
    lg_edges = set()
    for bundle in incident.values():
        lg_edges.update(combinations(bundle, 2))
    return Graph(len(ends), tuple(lg_edges)), bij


def edge_bundles(g: BipartiteGraph, bij: EdgeBijection) -> tuple[list[list[int]], list[list[int]]]:
    """Line-graph vertices grouped by their ``X`` endpoint and by their ``Y`` endpoint."""
    xs: list[list[int]] = [[] for _ in range(g.x_count)]
    ys: list[list[int]] = [[] for _ in range(g.y_count)]
    for k, (x, y) in enumerate(bij.backward):
        xs[x].append(k)
        ys[y].append(k)
    return xs, ys


def validate_krausz_partition(g: Graph, cliques: Sequence[Iterable[int]]) -> KrauszReport:
    """Check a clique partition against the Krausz conditions.

    Violations: non-cliques, edges covered zero or several times, vertices in
    more than two cliques. Two-colorability refers to the graph whose nodes are
    the cliques, adjacent when they share a vertex.
    """
    parts = [frozenset(c) for c in cliques]
    violations: list[str] = []
    for idx, c in enumerate(parts):
        if not c:
            violations.append(f"clique {idx} is empty")
        elif not g.is_clique(c):
            violations.append(f"clique {idx} {sorted(c)} is not a clique")

    cover: dict[tuple[int, int], int] = {}
    for c in parts:
        for u, v in combinations(sorted(c), 2):
            cover[(u, v)] = cover.get((u, v), 0) + 1
    for e in g.edges:
        count = cover.get(e, 0)
        if count == 0:
            violations.append(f"edge {e} uncovered")
        elif count > 1:
            violations.append(f"edge {e} covered {count} times")

    membership: dict[int, list[int]] = {}
    for idx, c in enumerate(parts):
        for v in c:
            membership.setdefault(v, []).append(idx)
    for v in sorted(membership):
        if len(membership[v]) > 2:
            violations.append(f"vertex {v} lies in {len(membership[v])} cliques")

    adj: list[set[int]] = [set() for _ in parts]
    for owners in membership.values():
        for a, b in combinations(owners, 2):
            adj[a].add(b)
            adj[b].add(a)
    coloring = _two_color([tuple(sorted(a)) for a in adj])
    return KrauszReport(tuple(violations), coloring is not None, coloring)


def root_graph_from_two_colorable_partition(
    g: Graph,
    part_a: Sequence[Iterable[int]],
    part_b: Sequence[Iterable[int]],
) -> tuple[BipartiteGraph, EdgeBijection]:
    """Recover the bipartite root graph from a two-colored Krausz partition.

    Clique ``a[i]`` becomes ``x = i`` and clique ``b[j]`` becomes ``y = j``;
    every vertex of ``g`` becomes the edge ``(x, y)`` of the two cliques
    containing it. The returned bijection maps ``(x, y)`` to the vertex of ``g``.
    """
    a = [frozenset(c) for c in part_a]
    b = [frozenset(c) for c in part_b]
    if not a or not b:
        raise RootGraphError("both color classes must be non-empty")

    owner_a = _single_owner(g.n, a, "a")
    owner_b = _single_owner(g.n, b, "b")

    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            shared = ca & cb
            if len(shared) >= 2:
                raise AmbiguousLabelingError(i, j, shared)

    report = validate_krausz_partition(g, a + b)
    if not report.valid:
        raise RootGraphError("not a Krausz partition: " + "; ".join(report.violations))

    labels = tuple((owner_a[v], owner_b[v]) for v in range(g.n))
    return BipartiteGraph(len(a), len(b), labels), EdgeBijection(labels)


def find_claw(g: Graph) -> tuple[int, int, int, int] | None:
    """Return ``(center, leaf, leaf, leaf)`` of an induced K_{1,3}, or None."""
    edges = g.edge_set
    for center in range(g.n):
        for trio in combinations(g.neighbors(center), 3):
            if all((min(u, v), max(u, v)) not in edges for u, v in combinations(trio, 2)):
                return (center, *trio)
    return None


def _single_owner(n: int, cliques: list[frozenset[int]], name: str) -> list[int]:
    owner = [-1] * n
    for idx, c in enumerate(cliques):
        for v in c:
            if not 0 <= v < n:
                raise RootGraphError(f"class {name} clique {idx} has vertex {v} out of range")
            if owner[v] != -1:
                raise RootGraphError(f"vertex {v} lies in two cliques of class {name}")
            owner[v] = idx
    missing = [v for v in range(n) if owner[v] == -1]
    if missing:
        raise RootGraphError(f"vertices {missing} missing from class {name}")
    return owner


def _reachable(adj: Sequence[Sequence[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _two_color(adj: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    color = [-1] * len(adj)
    for s in range(len(adj)):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return tuple(color)
