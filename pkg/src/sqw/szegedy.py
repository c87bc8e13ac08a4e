"""Szegedy's walk and its conversions to and from the staggered model.

Product-space states ``|x, y>`` are indexed ``x * n + y`` with ``n = |Y|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import BipartiteGraph, EdgeBijection, Graph, GraphError, edge_bundles, line_graph
from .staggered import reflection_operator
from .tessellation import Polygon, Tessellation, TessellationError, polygon_intersections

STOCHASTIC_TOL = 1e-12


class SzegedyError(ValueError):
    pass


class ConversionObstruction(Exception):
    """A staggered walk with a multi-vertex polygon intersection.

    No bijection onto ``|k, k'>`` labels exists, so the walk has no Szegedy form.
    """

    def __init__(self, alpha_index: int, beta_index: int, shared: tuple[int, ...]):
        self.alpha_index = alpha_index
        self.beta_index = beta_index
        self.shared = tuple(shared)
        super().__init__(
            f"polygons alpha[{alpha_index}] and beta[{beta_index}] share vertices "
            f"{list(self.shared)}"
        )

    def to_dict(self) -> dict:
        return {
            "error": "conversion_obstruction",
            "alpha": self.alpha_index,
            "beta": self.beta_index,
            "shared": list(self.shared),
        }


@dataclass(frozen=True, eq=False)
class SzegedyInstance:
    """Bipartite graph with right-stochastic ``P`` (m x n) and ``Q`` (n x m).

    ``theta`` and ``theta_prime`` are optional m x n phase matrices for the
    extended model. With ``strict_support`` the supports of ``P``, ``Q^T`` and
    the biadjacency matrix must coincide; the sink construction used for search
    relaxes this to "an edge carries weight in ``P`` or in ``Q``".
    """

    bipartite: BipartiteGraph
    P: np.ndarray
    Q: np.ndarray
    theta: np.ndarray | None = None
    theta_prime: np.ndarray | None = None
    strict_support: bool = True

    def __post_init__(self):
        m, n = self.bipartite.x_count, self.bipartite.y_count
        p = np.array(self.P, dtype=float)
        q = np.array(self.Q, dtype=float)
        if p.shape != (m, n) or q.shape != (n, m):
            raise SzegedyError(f"P must be {m}x{n} and Q {n}x{m}, got {p.shape} and {q.shape}")
        for name, mat in (("P", p), ("Q", q)):
            if np.any(mat < 0):
                raise SzegedyError(f"{name} has negative entries")
            bad = np.flatnonzero(np.abs(mat.sum(axis=1) - 1) > STOCHASTIC_TOL)
            if bad.size:
                raise SzegedyError(f"rows {bad.tolist()} of {name} do not sum to 1")
        adj = self.bipartite.biadjacency() > 0
        if self.strict_support:
            if not (np.array_equal(p > 0, adj) and np.array_equal(q.T > 0, adj)):
                raise SzegedyError("supports of P, Q^T and the biadjacency matrix differ")
        elif not np.array_equal((p > 0) | (q.T > 0), adj):
            raise SzegedyError("edges must be exactly the pairs carrying weight in P or Q")
        phases = []
        for name in ("theta", "theta_prime"):
            ph = getattr(self, name)
            if ph is not None:
                ph = np.array(ph, dtype=float)
                if ph.shape != (m, n):
                    raise SzegedyError(f"{name} must be {m}x{n}, got {ph.shape}")
                ph.setflags(write=False)
            phases.append(ph)
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "theta", phases[0])
        object.__setattr__(self, "theta_prime", phases[1])

    @classmethod
    def from_matrices(cls, P, Q, theta=None, theta_prime=None) -> "SzegedyInstance":
        """Infer the bipartite graph from the support of ``P``."""
        p = np.asarray(P, dtype=float)
        m, n = p.shape
        edges = tuple((int(x), int(y)) for x, y in zip(*np.nonzero(p > 0)))
        return cls(BipartiteGraph(m, n, edges), p, Q, theta, theta_prime)

    @property
    def m(self) -> int:
        return self.bipartite.x_count

    @property
    def n(self) -> int:
        return self.bipartite.y_count

    def __eq__(self, other) -> bool:
        if not isinstance(other, SzegedyInstance):
            return NotImplemented

        def same(a, b):
            return (a is None and b is None) or (
                a is not None and b is not None and np.array_equal(a, b)
            )

        return (
            self.bipartite == other.bipartite
            and np.array_equal(self.P, other.P)
            and np.array_equal(self.Q, other.Q)
            and same(self.theta, other.theta)
            and same(self.theta_prime, other.theta_prime)
            and self.strict_support == other.strict_support
        )

    __hash__ = None

    def index(self, x: int, y: int) -> int:
        return x * self.n + y

    def a_amplitudes(self) -> np.ndarray:
        """``sqrt(p_xy) exp(i theta_xy)`` as an m x n array."""
        amp = np.sqrt(self.P).astype(complex)
        if self.theta is not None:
            amp = amp * np.exp(1j * self.theta)
        return amp

    def b_amplitudes(self) -> np.ndarray:
        """``sqrt(q_yx) exp(i theta'_xy)`` as an m x n array (indexed by x, y)."""
        amp = np.sqrt(self.Q.T).astype(complex)
        if self.theta_prime is not None:
            amp = amp * np.exp(1j * self.theta_prime)
        return amp

    def phi(self) -> np.ndarray:
        """Columns ``|phi_x>`` in the m*n product space."""
        m, n = self.m, self.n
        out = np.zeros((m * n, m), dtype=complex)
        a = self.a_amplitudes()
        for x in range(m):
            out[x * n:(x + 1) * n, x] = a[x]
        return out

    def psi(self) -> np.ndarray:
        """Columns ``|psi_y>`` in the m*n product space."""
        m, n = self.m, self.n
        out = np.zeros((m * n, n), dtype=complex)
        b = self.b_amplitudes()
        for y in range(n):
            out[y::n, y] = b[:, y]
        return out


def szegedy_reflections(inst: SzegedyInstance) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(inst.m * inst.n, dtype=complex)
    phi, psi = inst.phi(), inst.psi()
    return 2 * phi @ phi.conj().T - eye, 2 * psi @ psi.conj().T - eye


def szegedy_operator(inst: SzegedyInstance) -> np.ndarray:
    """``W = R_1 R_0`` on the full m*n product space."""
    r0, r1 = szegedy_reflections(inst)
    return r1 @ r0


def szegedy_expand(inst: SzegedyInstance, x: int, y: int) -> np.ndarray:
    """``W|x, y>`` from the four-term expansion with ``C_{y'x} = <psi_y'|phi_x>``.

    With phases, the real coefficients ``sqrt(p)``, ``sqrt(q)`` become the
    conjugated amplitudes of ``|x, y>`` in ``phi_x`` and ``psi_y``.

    Raises:
        SzegedyError: ``(x, y)`` is not an edge (``W`` is not computed there).
    """
    if (x, y) not in set(inst.bipartite.edges):
        raise SzegedyError(f"({x}, {y}) is not an edge of the bipartite graph")
    phi, psi = inst.phi(), inst.psi()
    a = inst.a_amplitudes()[x, y]
    b = inst.b_amplitudes()[x, y]
    c = psi.conj().T @ phi[:, x]
    out = 4 * np.conj(a) * (psi @ c) - 2 * np.conj(b) * psi[:, y] - 2 * np.conj(a) * phi[:, x]
    out[inst.index(x, y)] += 1
    return out


def edge_relabeling(inst: SzegedyInstance, bij: EdgeBijection) -> np.ndarray:
    """Product-space index of each line-graph vertex ``f^{-1}(k)``."""
    return np.array([inst.index(x, y) for x, y in bij.backward])


def szegedy_to_staggered(inst: SzegedyInstance) -> tuple[Graph, Tessellation, Tessellation, EdgeBijection]:
    """Staggered walk on the line graph with ``alpha_x`` and ``beta_y`` polygons.

    Polygon ``alpha[x]`` holds the edges at ``x`` with amplitudes
    ``sqrt(p_xy) e^{i theta_xy}``; ``beta[y]`` likewise with ``Q`` and ``theta'``.
    """
    if not inst.bipartite.is_connected():
        raise SzegedyError("the bipartite graph must be connected")
    lg, bij = line_graph(inst.bipartite)
    xs, ys = edge_bundles(inst.bipartite, bij)
    a = inst.a_amplitudes()
    b = inst.b_amplitudes()
    alpha = Tessellation(
        tuple(Polygon(tuple(ks), [a[bij.edge(k)] for k in ks]) for ks in xs if ks), lg.n
    )
    beta = Tessellation(
        tuple(Polygon(tuple(ks), [b[bij.edge(k)] for k in ks]) for ks in ys if ks), lg.n
    )
    return lg, alpha, beta, bij


def staggered_to_szegedy(
    g: Graph, alpha: Tessellation, beta: Tessellation
) -> tuple[SzegedyInstance, EdgeBijection]:
    """Extended Szegedy instance whose ``W`` reproduces the staggered ``U``.

    Vertex ``v`` in ``alpha[k]`` and ``beta[k']`` is relabeled ``|k, k'>``;
    ``p_kk' = |a|^2`` and ``theta_kk' = arg a`` (likewise for ``Q``). The
    bijection maps ``(k, k')`` to ``v``.

    Raises:
        ConversionObstruction: some polygon pair shares two or more vertices.
    """
    if alpha.partial or beta.partial:
        raise TessellationError("conversion needs full tessellations")
    if alpha.n != g.n or beta.n != g.n:
        raise TessellationError("tessellations and graph disagree on the vertex count")
    grid, biggest = polygon_intersections(alpha, beta)
    if biggest >= 2:
        for k, row in enumerate(grid):
            for kk, common in enumerate(row):
                if len(common) >= 2:
                    raise ConversionObstruction(k, kk, tuple(sorted(common)))
    m, n = len(alpha), len(beta)
    own_a, own_b = alpha.owner(), beta.owner()
    labels = tuple((own_a[v], own_b[v]) for v in range(g.n))
    p = np.zeros((m, n))
    q = np.zeros((n, m))
    theta = np.zeros((m, n))
    theta_p = np.zeros((m, n))
    for v, (k, kk) in enumerate(labels):
        a = alpha[k].amplitude(v)
        b = beta[kk].amplitude(v)
        p[k, kk], theta[k, kk] = abs(a) ** 2, np.angle(a)
        q[kk, k], theta_p[k, kk] = abs(b) ** 2, np.angle(b)
    # |a|^2 sums to 1 only up to rounding; renormalize rows to the strict tolerance
    p /= p.sum(axis=1, keepdims=True)
    q /= q.sum(axis=1, keepdims=True)
    try:
        bip = BipartiteGraph(m, n, labels)
    except GraphError as exc:
        raise TessellationError(str(exc)) from exc
    inst = SzegedyInstance(bip, p, q, theta, theta_p)
    return inst, EdgeBijection(labels)


@dataclass(frozen=True, eq=False)
class SearchInstance:
    """Sink-modified Szegedy chain together with its staggered equivalent.

    ``duplicated`` is the undirected bipartite double cover ``Gamma(X, X', E')``;
    ``szegedy`` is the directed chain ``Gamma'`` with ``P'``, ``Q'`` (marked rows
    sent to their copies). The staggered walk lives on ``line_graph`` (the line
    graph of ``duplicated``) with partial tessellations that omit the polygons of
    marked vertices. ``alpha_labels[k]`` is the ``X`` vertex of ``alpha[k]``.
    """

    graph: Graph
    P: np.ndarray
    marked: tuple[int, ...]
    duplicated: BipartiteGraph
    szegedy: SzegedyInstance
    line_graph: Graph
    bijection: EdgeBijection
    alpha: Tessellation
    beta: Tessellation
    alpha_labels: tuple[int, ...]
    beta_labels: tuple[int, ...]
    psi0: np.ndarray
    psi0_normalizer: float
    arcs_forward: tuple[tuple[int, int], ...] = field(default=())
    arcs_backward: tuple[tuple[int, int], ...] = field(default=())

    @property
    def P_prime(self) -> np.ndarray:
        return self.szegedy.P

    @property
    def Q_prime(self) -> np.ndarray:
        return self.szegedy.Q

    @property
    def marked_line_vertices(self) -> frozenset[int]:
        """Line-graph vertices outside every ``alpha`` polygon."""
        return self.alpha.uncovered

    def operator(self) -> np.ndarray:
        return reflection_operator(self.beta) @ reflection_operator(self.alpha)


def szegedy_search_instance(g: Graph, P, marked) -> SearchInstance:
    """Build the sink chain for detecting ``marked`` and its staggered twin.

    Each edge ``{i, j}`` of ``g`` becomes ``(i, j')`` and ``(j, i')`` in the
    double cover. Marked vertices lose their outgoing arcs and get a weight-one
    arc to their own copy.
    """
    p = np.asarray(P, dtype=float)
    n = g.n
    m_set = set(int(v) for v in marked)
    if not m_set:
        raise SzegedyError("at least one vertex must be marked")
    if len(m_set) >= n or any(not 0 <= v < n for v in m_set):
        raise SzegedyError("marked vertices must be a proper subset of the graph's vertices")
    if p.shape != (n, n):
        raise SzegedyError(f"P must be {n}x{n}")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1) > STOCHASTIC_TOL):
        raise SzegedyError("P must be row-stochastic")
    if not np.array_equal(p > 0, g.adjacency_matrix() > 0):
        raise SzegedyError("support of P differs from the edges of the graph")

    dup_edges = tuple((i, j) for i in range(n) for j in range(n) if p[i, j] > 0)
    duplicated = BipartiteGraph(n, n, dup_edges)

    p_prime = p.copy()
    for v in m_set:
        p_prime[v] = 0
        p_prime[v, v] = 1
    q_prime = p_prime.copy()
    sink_edges = dup_edges + tuple((v, v) for v in sorted(m_set))
    directed = BipartiteGraph(n, n, sink_edges)
    chain = SzegedyInstance(directed, p_prime, q_prime, strict_support=False)

    lg, bij = line_graph(duplicated)
    xs, ys = edge_bundles(duplicated, bij)
    sq = np.sqrt(p)
    alpha_labels = tuple(x for x in range(n) if x not in m_set and xs[x])
    beta_labels = tuple(y for y in range(n) if y not in m_set and ys[y])
    alpha = Tessellation(
        tuple(Polygon(tuple(xs[x]), [sq[bij.edge(k)] for k in xs[x]]) for x in alpha_labels), lg.n
    )
    beta = Tessellation(
        tuple(Polygon(tuple(ys[y]), [sq[bij.edge(k)[1], bij.edge(k)[0]] for k in ys[y]]) for y in beta_labels),
        lg.n,
    )

    raw = np.array([sq[x, y] for x, y in bij.backward], dtype=complex)
    norm = float(np.linalg.norm(raw))
    psi0 = raw / norm

    arcs_f = tuple((int(x), int(y)) for x, y in zip(*np.nonzero(p_prime > 0)))
    arcs_b = tuple((int(y), int(x)) for y, x in zip(*np.nonzero(q_prime > 0)))
    return SearchInstance(
        graph=g,
        P=p,
        marked=tuple(sorted(m_set)),
        duplicated=duplicated,
        szegedy=chain,
        line_graph=lg,
        bijection=bij,
        alpha=alpha,
        beta=beta,
        alpha_labels=alpha_labels,
        beta_labels=beta_labels,
        psi0=psi0,
        psi0_normalizer=1 / norm,
        arcs_forward=arcs_f,
        arcs_backward=arcs_b,
    )


@dataclass(frozen=True)
class ObservableReadout:
    """Probability of each ``alpha`` polygon label plus the mass outside all of them."""

    probabilities: np.ndarray
    remainder: float

    @property
    def total(self) -> float:
        return float(self.probabilities.sum() + self.remainder)


def polygon_observable_measure(state, alpha: Tessellation) -> ObservableReadout:
    """Measure the projectors onto the vertex sets of ``alpha``'s polygons."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    if psi.size != alpha.n:
        raise ValueError(f"state has dimension {psi.size}, tessellation has {alpha.n} vertices")
    weights = np.abs(psi) ** 2
    probs = np.array([weights[list(p.vertices)].sum() for p in alpha])
    rest = list(alpha.uncovered)
    return ObservableReadout(probs, float(weights[rest].sum()) if rest else 0.0)
