"""Polygons, tessellations and their validation.

A polygon is a clique of the host graph carrying a unit vector of nonzero
complex amplitudes. A tessellation is a set of vertex-disjoint polygons; when
it does not cover every vertex it is *partial* and the uncovered vertices are
marked (the generalized model used for search).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph

# Construction-time and verification-time numeric tolerances.
CONSTRUCT_TOL = 1e-12
VERIFY_TOL = 1e-10


class TessellationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Polygon:
    """Vertex tuple plus a unit vector of amplitudes over those vertices.

    Amplitudes are renormalized on construction; a zero vector or a zero entry
    raises (zero entries belong to the partial-tessellation form instead).
    """

    vertices: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        vs = tuple(int(v) for v in self.vertices)
        if not vs:
            raise TessellationError("polygon has no vertices")
        if len(set(vs)) != len(vs):
            raise TessellationError(f"polygon {vs} repeats a vertex")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (len(vs),):
            raise TessellationError(
                f"polygon {vs} has {len(vs)} vertices but {amps.size} amplitudes"
            )
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise TessellationError(f"polygon {vs} has a zero amplitude vector")
        if np.any(amps == 0):
            raise TessellationError(f"polygon {vs} has a zero amplitude")
        if abs(norm - 1) > CONSTRUCT_TOL:
            amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def uniform(cls, vertices: Iterable[int]) -> "Polygon":
        vs = tuple(vertices)
        return cls(vs, np.full(len(vs), 1 / np.sqrt(len(vs)), dtype=complex))

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polygon):
            return NotImplemented
        return self.vertices == other.vertices and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self) -> int:
        return hash(self.vertices)

    def amplitude(self, v: int) -> complex:
        """Amplitude on vertex ``v`` (zero if ``v`` is outside the polygon)."""
        try:
            return complex(self.amplitudes[self.vertices.index(v)])
        except ValueError:
            return 0j

    def vector(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        out[list(self.vertices)] = self.amplitudes
        return out


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Ordered, pairwise vertex-disjoint polygons over ``n`` vertices."""

    polygons: tuple[Polygon, ...]
    n: int

    def __post_init__(self):
        polys = tuple(self.polygons)
        seen: dict[int, int] = {}
        for k, p in enumerate(polys):
            for v in p.vertices:
                if not 0 <= v < self.n:
                    raise TessellationError(f"polygon {k} has vertex {v} outside 0..{self.n - 1}")
                if v in seen:
                    raise TessellationError(f"polygons {seen[v]} and {k} overlap on vertex {v}")
                seen[v] = k
        object.__setattr__(self, "polygons", polys)

    def __len__(self) -> int:
        return len(self.polygons)

    def __iter__(self):
        return iter(self.polygons)

    def __getitem__(self, k: int) -> Polygon:
        return self.polygons[k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tessellation):
            return NotImplemented
        return self.n == other.n and self.polygons == other.polygons

    __hash__ = None

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(v for p in self.polygons for v in p.vertices)

    @property
    def uncovered(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.covered

    @property
    def partial(self) -> bool:
        return len(self.covered) < self.n

    def owner(self) -> list[int]:
        """Polygon index per vertex, ``-1`` where uncovered."""
        own = [-1] * self.n
        for k, p in enumerate(self.polygons):
            for v in p.vertices:
                own[v] = k
        return own

    def vectors(self) -> np.ndarray:
        """Columns are the polygon vectors (the ``N x m`` isometry)."""
        out = np.zeros((self.n, len(self.polygons)), dtype=complex)
        for k, p in enumerate(self.polygons):
            out[list(p.vertices), k] = p.amplitudes
        return out

    def vertex_sets(self) -> list[frozenset[int]]:
        return [frozenset(p.vertices) for p in self.polygons]


@dataclass(frozen=True)
class FamilyReport:
    violations: tuple[str, ...]
    uncovered_edges: tuple[tuple[int, int], ...]
    max_intersection: int
    # (tessellation i, tessellation j, polygon of i, polygon of j, shared vertices)
    multi_vertex_intersections: tuple[tuple[int, int, int, int, tuple[int, ...]], ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def uniform_tessellation(g: Graph, polygon_vertex_sets: Sequence[Iterable[int]]) -> Tessellation:
    """Tessellation with amplitude ``1/sqrt(|polygon|)`` on every polygon vertex."""
    polys = []
    for vs in polygon_vertex_sets:
        vs = tuple(sorted(vs))
        if not g.is_clique(vs):
            raise TessellationError(f"vertex set {list(vs)} is not a clique of the graph")
        polys.append(Polygon.uniform(vs))
    return Tessellation(tuple(polys), g.n)


def tessellation_from_vectors(vectors: Sequence[Sequence[complex]], n: int | None = None) -> Tessellation:
    """Read polygons from dense amplitude vectors; zero entries are dropped.

    This turns the zero-amplitude description of the generalized model into the
    partial-tessellation form.
    """
    rows = [np.asarray(v, dtype=complex) for v in vectors]
    if n is None:
        n = rows[0].size if rows else 0
    polys = []
    for row in rows:
        if row.size != n:
            raise TessellationError(f"vector of length {row.size}, expected {n}")
        support = tuple(int(i) for i in np.flatnonzero(row))
        polys.append(Polygon(support, row[list(support)]))
    return Tessellation(tuple(polys), n)


def polygon_intersections(a: Tessellation, b: Tessellation) -> tuple[list[list[frozenset[int]]], int]:
    """Matrix of ``a_k & b_k'`` vertex sets and the largest intersection size."""
    if a.n != b.n:
        raise TessellationError(f"tessellations over {a.n} and {b.n} vertices")
    sa, sb = a.vertex_sets(), b.vertex_sets()
    grid = [[x & y for y in sb] for x in sa]
    biggest = max((len(c) for row in grid for c in row), default=0)
    return grid, biggest


def marked_vertices(g: Graph, tessellations: Sequence[Tessellation]) -> frozenset[int]:
    """Vertices missing from at least one tessellation."""
    out: set[int] = set()
    for t in tessellations:
        out |= set(range(g.n)) - t.covered
    return frozenset(out)


def validate_tessellation_family(g: Graph, tessellations: Sequence[Tessellation]) -> FamilyReport:
    """Check each tessellation against ``g`` and the family edge-cover condition.

    Raises:
        TessellationError: fewer than two tessellations.
    """
    if len(tessellations) < 2:
        raise TessellationError("a staggered walk needs at least two tessellations")
    violations: list[str] = []
    for t_idx, t in enumerate(tessellations):
        if t.n != g.n:
            violations.append(f"tessellation {t_idx} is over {t.n} vertices, graph has {g.n}")
            continue
        for k, p in enumerate(t.polygons):
            if not g.is_clique(p.vertices):
                violations.append(f"tessellation {t_idx} polygon {k} {list(p.vertices)} is not a clique")
            norm = np.linalg.norm(p.amplitudes)
            if abs(norm - 1) > VERIFY_TOL:
                violations.append(f"tessellation {t_idx} polygon {k} has norm {norm!r}")
            if np.any(np.abs(p.amplitudes) == 0):
                violations.append(f"tessellation {t_idx} polygon {k} has a zero amplitude")
    if violations:
        return FamilyReport(tuple(violations), (), 0, ())

    inside: set[tuple[int, int]] = set()
    for t in tessellations:
        for p in t.polygons:
            inside.update(combinations(sorted(p.vertices), 2))
    uncovered = tuple(e for e in g.edges if e not in inside)
    any_partial = any(t.partial for t in tessellations)
    if uncovered and not any_partial:
        violations.extend(f"edge {e} is inside no polygon" for e in uncovered)
    if any_partial:
        nowhere = set(range(g.n))
        for t in tessellations:
            nowhere -= t.covered
        if nowhere:
            violations.append(f"vertices {sorted(nowhere)} are inside no tessellation")

    biggest = 0
    multi = []
    for i, j in combinations(range(len(tessellations)), 2):
        grid, size = polygon_intersections(tessellations[i], tessellations[j])
        biggest = max(biggest, size)
        for k, row in enumerate(grid):
            for kk, common in enumerate(row):
                if len(common) >= 2:
                    multi.append((i, j, k, kk, tuple(sorted(common))))
    return FamilyReport(tuple(violations), uncovered, biggest, tuple(multi))
