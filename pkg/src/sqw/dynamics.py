"""State evolution, Born-rule readout and the quantum hitting time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .staggered import NotUnitaryError, is_unitary

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HittingTimeResult:
    """``T`` is None when no step up to ``t_max`` reaches the threshold."""

    T: int | None
    trace: np.ndarray
    threshold: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "threshold": float(self.threshold),
            "converged": self.converged,
            "trace": [float(x) for x in self.trace],
        }


def uniform_state(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("uniform state needs at least one vertex")
    return np.full(n, 1 / np.sqrt(n), dtype=complex)


def basis_state(n: int, k: int) -> np.ndarray:
    if not 0 <= k < n:
        raise ValueError(f"basis index {k} outside 0..{n - 1}")
    psi = np.zeros(n, dtype=complex)
    psi[k] = 1
    return psi


def _check(u: np.ndarray, psi0) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=complex)
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if u.ndim != 2 or u.shape != (psi.size, psi.size):
        raise ValueError(f"operator of shape {u.shape} cannot act on a state of size {psi.size}")
    if not is_unitary(u):
        raise NotUnitaryError("evolution operator is not unitary")
    return u, psi


def evolve(u: np.ndarray, psi0, steps: int) -> np.ndarray:
    """States ``psi(0) .. psi(steps)`` as rows, by repeated application of ``u``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    u, psi = _check(u, psi0)
    out = np.empty((steps + 1, psi.size), dtype=complex)
    out[0] = psi
    for t in range(steps):
        psi = u @ psi
        out[t + 1] = psi
    return out


def vertex_distribution(psi) -> np.ndarray:
    """``|psi_k|^2`` for a normalized state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1) > NORM_TOL:
        raise ValueError(f"state has squared norm {norm2!r}, expected 1")
    p = np.abs(psi) ** 2
    return p / p.sum()


def hitting_time(
    u_m: np.ndarray,
    psi0,
    marked_count: int,
    n: int,
    t_max: int | None = None,
) -> HittingTimeResult:
    """Smallest ``T`` with mean of ``|psi(t) - psi(0)|^2`` over ``t = 0..T`` at
    least ``1 - marked_count / n``.

    ``n`` is the vertex count of the walk's graph. The running sum uses
    Neumaier compensation. ``t_max`` defaults to ``10 n^2``.
    """
    if not 0 < marked_count <= n:
        raise ValueError(f"marked_count must be in 1..{n}, got {marked_count}")
    if t_max is None:
        t_max = 10 * n * n
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    u, psi = _check(u_m, psi0)
    start = psi.copy()
    threshold = 1 - marked_count / n

    trace = []
    total = 0.0
    comp = 0.0
    for t in range(t_max + 1):
        diff = psi - start
        term = float(np.vdot(diff, diff).real)
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
        f = (total + comp) / (t + 1)
        trace.append(f)
        if f >= threshold:
            return HittingTimeResult(t, np.array(trace), threshold, True)
        psi = u @ psi
    return HittingTimeResult(None, np.array(trace), threshold, False)
