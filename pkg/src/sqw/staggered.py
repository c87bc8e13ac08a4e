"""Reflections, evolution and search operators of the staggered model.

Operators are dense complex ``numpy`` arrays. For a family ``[t0, t1, ...]``
the first tessellation is applied first: ``U = U_last ... U_1 U_0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, complete_graph
from .tessellation import Polygon, Tessellation, TessellationError

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
EIGEN_CLUSTER_TOL = 1e-8


class NotUnitaryError(ArithmeticError):
    pass


class NumericMismatchError(ArithmeticError):
    """Two routes to the same operator disagree beyond tolerance."""


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and max_abs(u.conj().T @ u - np.eye(len(u))) <= tol


def is_hermitian(u: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and max_abs(u - u.conj().T) <= tol


def reflection_operator(t: Tessellation, n: int | None = None) -> np.ndarray:
    """``2 sum_k |p_k><p_k| - I``; vertices outside every polygon get ``-1``."""
    if n is not None and n != t.n:
        raise TessellationError(f"tessellation is over {t.n} vertices, asked for {n}")
    a = t.vectors()
    return 2 * (a @ a.conj().T) - np.eye(t.n, dtype=complex)


def evolution_operator(tessellations: Sequence[Tessellation]) -> np.ndarray:
    if len(tessellations) < 2:
        raise TessellationError("a staggered walk needs at least two tessellations")
    n = tessellations[0].n
    if any(t.n != n for t in tessellations):
        raise TessellationError("tessellations are over different vertex counts")
    u = np.eye(n, dtype=complex)
    for t in tessellations:
        u = reflection_operator(t) @ u
    return u


def expand_basis_state(alpha: Tessellation, beta: Tessellation, k: int) -> np.ndarray:
    """``U|k>`` assembled term by term from polygon amplitudes and overlaps.

    Independent of the matrix product in :func:`evolution_operator`, so the two
    can be checked against each other.
    """
    if alpha.partial or beta.partial:
        raise TessellationError("basis-state expansion needs full tessellations")
    if alpha.n != beta.n:
        raise TessellationError("tessellations are over different vertex counts")
    n = alpha.n
    avecs = [p.vector(n) for p in alpha]
    bvecs = [p.vector(n) for p in beta]
    a_k = [p.amplitude(k) for p in alpha]
    b_k = [p.amplitude(k) for p in beta]
    # overlaps <alpha_k'|beta_k''>
    d = np.array([[np.vdot(av, bv) for bv in bvecs] for av in avecs])

    out = np.zeros(n, dtype=complex)
    for i, av in enumerate(avecs):
        for j, bv in enumerate(bvecs):
            out += 4 * np.conj(d[i, j]) * np.conj(a_k[i]) * bv
    for j, bv in enumerate(bvecs):
        out -= 2 * np.conj(b_k[j]) * bv
    for i, av in enumerate(avecs):
        out -= 2 * np.conj(a_k[i]) * av
    out[k] += 1
    return out


@dataclass(frozen=True)
class ReflectionClassification:
    is_orthogonal_reflection: bool
    recovered_polygons: tuple[Polygon, ...] = ()
    failure_reason: str | None = None

    def __bool__(self) -> bool:
        return self.is_orthogonal_reflection


def classify_orthogonal_reflection(u: np.ndarray, tol: float = EIGEN_CLUSTER_TOL) -> ReflectionClassification:
    """Decide whether ``u`` is an orthogonal reflection of some graph.

    The +1 eigenspace admits an orthonormal basis with pairwise disjoint
    supports exactly when its projector splits into rank-one blocks along the
    connected components of the projector's nonzero pattern. Each block gives a
    polygon; the blocks must jointly touch every vertex.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return ReflectionClassification(False, failure_reason="not a square matrix")
    if not is_unitary(u):
        return ReflectionClassification(False, failure_reason="not unitary")
    if not is_hermitian(u):
        return ReflectionClassification(False, failure_reason="not Hermitian")
    n = len(u)
    w, v = np.linalg.eigh((u + u.conj().T) / 2)
    plus = v[:, np.abs(w - 1) <= tol]
    if plus.shape[1] == 0:
        return ReflectionClassification(False, failure_reason="no +1 eigenvector")
    if np.any(np.abs(w[np.abs(w - 1) > tol] + 1) > tol):
        return ReflectionClassification(False, failure_reason="eigenvalues other than +1 and -1")
    proj = plus @ plus.conj().T
    support = np.abs(proj) > tol

    diag = np.abs(np.diag(proj))
    if np.any(diag <= tol):
        empty = [int(i) for i in np.flatnonzero(diag <= tol)]
        return ReflectionClassification(
            False, failure_reason=f"+1 eigenvectors vanish on vertices {empty}"
        )

    comp = [-1] * n
    blocks: list[list[int]] = []
    for s in range(n):
        if comp[s] != -1:
            continue
        comp[s] = len(blocks)
        members = [s]
        stack = [s]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(support[i]):
                if comp[j] == -1:
                    comp[j] = comp[s]
                    members.append(int(j))
                    stack.append(int(j))
        blocks.append(sorted(members))

    if len(blocks) != plus.shape[1]:
        return ReflectionClassification(
            False,
            failure_reason=(
                f"+1 eigenspace has dimension {plus.shape[1]} but splits into "
                f"{len(blocks)} support blocks"
            ),
        )
    polys = []
    for members in blocks:
        sub = proj[np.ix_(members, members)]
        pivot = int(np.argmax(np.abs(np.diag(sub))))
        vec = sub[:, pivot] / np.sqrt(sub[pivot, pivot].real)
        if max_abs(sub - np.outer(vec, vec.conj())) > tol:
            return ReflectionClassification(
                False, failure_reason=f"block {members} is not rank one"
            )
        vec = vec * np.exp(-1j * np.angle(vec[0]))
        polys.append(Polygon(tuple(members), vec))
    return ReflectionClassification(True, tuple(polys))


def marked_reflection(marked: Iterable[int], n: int) -> np.ndarray:
    """``2 sum_{m in M} |m><m| - I``: +1 on marked vertices, -1 elsewhere."""
    diag = -np.ones(n, dtype=complex)
    for m in marked:
        if not 0 <= m < n:
            raise ValueError(f"marked vertex {m} outside 0..{n - 1}")
        diag[m] = 1
    return np.diag(diag)


def modified_beta(beta: Tessellation, marked: Iterable[int]) -> Tessellation:
    """Polygons of ``beta`` reflected by ``R_M``.

    Each amplitude keeps its sign on marked vertices and flips elsewhere, so a
    polygon disjoint from the marked set is negated as a whole.
    """
    m = set(marked)
    polys = []
    for p in beta:
        signs = np.array([1.0 if v in m else -1.0 for v in p.vertices])
        polys.append(Polygon(p.vertices, p.amplitudes * signs))
    return Tessellation(tuple(polys), beta.n)


def search_operator(alpha: Tessellation, beta: Tessellation, marked: Iterable[int]) -> np.ndarray:
    """``U_M = R_M U_1 R_M U_0``, cross-checked against ``U'_1 U_0``.

    Raises:
        NumericMismatchError: the two forms differ by more than 1e-12.
    """
    if alpha.n != beta.n:
        raise TessellationError("tessellations are over different vertex counts")
    marked = sorted(set(marked))
    n = alpha.n
    r_m = marked_reflection(marked, n)
    u0 = reflection_operator(alpha)
    u1 = reflection_operator(beta)
    four = r_m @ u1 @ r_m @ u0
    two = reflection_operator(modified_beta(beta, marked)) @ u0
    gap = max_abs(four - two)
    if gap > 1e-12:
        raise NumericMismatchError(f"R_M U1 R_M U0 and U1' U0 differ by {gap:.3e}")
    return four


def grover_instance(n: int, marked: Iterable[int]) -> tuple[Graph, Tessellation, Tessellation]:
    """Complete graph with singleton polygons on unmarked vertices and one
    all-vertex polygon; its evolution operator is Grover's iterate."""
    m = set(marked)
    if not m:
        raise ValueError("Grover instance needs at least one marked vertex")
    if any(not 0 <= v < n for v in m):
        raise ValueError(f"marked vertices must lie in 0..{n - 1}")
    if len(m) >= n:
        raise ValueError("marking every vertex leaves nothing to search")
    g = complete_graph(n)
    alpha = Tessellation(tuple(Polygon.uniform((v,)) for v in range(n) if v not in m), n)
    beta = Tessellation((Polygon.uniform(range(n)),), n)
    return g, alpha, beta
