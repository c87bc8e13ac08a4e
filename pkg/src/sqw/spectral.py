"""Spectrum of the two-tessellation search operator from the discriminant SVD.

With ``A = sum_k |alpha_k><k|`` and ``B = sum_k' |beta'_k'><k'|`` the discriminant
is ``D = A^dagger B``. Writing its singular values as ``cos(theta_j)``:

* each ``theta_j`` in ``(0, pi/2)`` yields eigenvalues ``exp(+-2i theta_j)`` with
  eigenvectors ``(A mu_j - exp(+-i theta_j) B nu_j) / (sqrt(2) sin theta_j)``;
* zero singular vectors give the -1 eigenspace (``A mu`` and ``B nu``);
* unit singular vectors give part of the +1 eigenspace (``A mu``).

The rest of the +1 eigenspace (the intersection of both orthogonal
complements) is only counted, not constructed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .staggered import modified_beta
from .tessellation import Tessellation, TessellationError

# Singular values within this distance of 0 or 1 are treated as exactly 0 or 1.
CLASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    singular_values: np.ndarray
    angles: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    zero_left: np.ndarray
    zero_right: np.ndarray
    unit_left: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sources: tuple[str, ...]
    pair_angles: np.ndarray
    residual_subspace_dim: int

    @property
    def s(self) -> int:
        return int(self.angles.size)

    def full_spectrum(self) -> np.ndarray:
        """Reconstructed eigenvalues plus +1 for each residual dimension."""
        return np.concatenate([self.eigenvalues, np.ones(self.residual_subspace_dim, dtype=complex)])


@dataclass(frozen=True)
class EigenReport:
    max_residual: float
    max_norm_error: float
    reconstructed_dim: int
    residual_subspace_dim: int
    dimension: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def discriminant(alpha: Tessellation, beta_prime: Tessellation) -> np.ndarray:
    """``D[k, k'] = <alpha_k | beta'_k'>``."""
    if alpha.n != beta_prime.n:
        raise TessellationError(f"tessellations over {alpha.n} and {beta_prime.n} vertices")
    return alpha.vectors().conj().T @ beta_prime.vectors()


def spectral_decomposition(
    alpha: Tessellation,
    beta: Tessellation,
    marked: Iterable[int] = (),
    tol: float = CLASS_TOL,
) -> SpectralDecomposition:
    """Eigenvalues and eigenvectors of ``U_M = R_M U_1 R_M U_0`` via the SVD of ``D``.

    With no marked vertices the raw ``beta`` is used in place of ``-beta``;
    both give the same reflection, only eigenvector signs change.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if alpha.n != beta.n:
        raise TessellationError("tessellations are over different vertex counts")
    marked = sorted(set(marked))
    beta_p = modified_beta(beta, marked) if marked else beta
    a = alpha.vectors()
    b = beta_p.vectors()
    d = a.conj().T @ b
    m, n = d.shape
    u, sv, vh = np.linalg.svd(d, full_matrices=True)
    v = vh.conj().T
    r = sv.size

    zero = sv <= tol
    unit = sv >= 1 - tol
    inner = ~(zero | unit)

    zero_left = np.hstack([u[:, :r][:, zero], u[:, r:]])
    zero_right = np.hstack([v[:, :r][:, zero], v[:, r:]])
    unit_left = u[:, :r][:, unit]

    cos = np.clip(sv[inner], 0.0, 1.0)
    angles = np.arccos(cos)
    mu = u[:, :r][:, inner]
    nu = v[:, :r][:, inner]

    values: list[complex] = []
    vectors: list[np.ndarray] = []
    sources: list[str] = []
    pair_angles: list[float] = []
    for j, th in enumerate(angles):
        amu = a @ mu[:, j]
        bnu = b @ nu[:, j]
        for sign in (1, -1):
            vec = (amu - np.exp(sign * 1j * th) * bnu) / (np.sqrt(2) * np.sin(th))
            values.append(np.exp(sign * 2j * th))
            vectors.append(vec)
            sources.append("complex")
            pair_angles.append(float(th))
    for col in zero_left.T:
        values.append(-1.0 + 0j)
        vectors.append(a @ col)
        sources.append("minus_one")
        pair_angles.append(np.nan)
    for col in zero_right.T:
        values.append(-1.0 + 0j)
        vectors.append(b @ col)
        sources.append("minus_one")
        pair_angles.append(np.nan)
    for col in unit_left.T:
        values.append(1.0 + 0j)
        vectors.append(a @ col)
        sources.append("plus_one")
        pair_angles.append(0.0)

    vals = np.array(values, dtype=complex)
    vecs = np.array(vectors, dtype=complex).T if vectors else np.zeros((alpha.n, 0), dtype=complex)
    vecs = _orthonormalize_degenerate(vals, vecs)
    residual = alpha.n - vals.size
    if residual < 0:
        raise ArithmeticError(
            f"reconstructed {vals.size} eigenvectors in dimension {alpha.n}; "
            "tolerance too loose for this instance"
        )
    return SpectralDecomposition(
        singular_values=sv,
        angles=angles,
        mu=mu,
        nu=nu,
        zero_left=zero_left,
        zero_right=zero_right,
        unit_left=unit_left,
        eigenvalues=vals,
        eigenvectors=vecs,
        sources=tuple(sources),
        pair_angles=np.array(pair_angles, dtype=float),
        residual_subspace_dim=residual,
    )


def _orthonormalize_degenerate(vals: np.ndarray, vecs: np.ndarray, gap: float = 1e-9) -> np.ndarray:
    """QR within each cluster of (numerically) equal eigenvalues."""
    out = vecs.copy()
    done = np.zeros(vals.size, dtype=bool)
    for i in range(vals.size):
        if done[i]:
            continue
        group = np.flatnonzero(~done & (np.abs(vals - vals[i]) <= gap))
        done[group] = True
        q, _ = np.linalg.qr(out[:, group])
        # keep each vector's phase aligned with the original
        phases = np.sum(q.conj() * out[:, group], axis=0)
        phases = np.where(np.abs(phases) > 0, phases / np.abs(phases), 1)
        out[:, group] = q * phases
    return out


def verify_eigensystem(u_m: np.ndarray, dec: SpectralDecomposition, tol: float = 1e-8) -> EigenReport:
    """Residuals ``|U_M v - lambda v|``, eigenvector norms and dimension count."""
    u_m = np.asarray(u_m)
    dim = u_m.shape[0]
    failures: list[str] = []
    vecs = dec.eigenvectors
    if vecs.shape[0] != dim:
        failures.append(f"eigenvectors live in dimension {vecs.shape[0]}, operator in {dim}")
        return EigenReport(np.inf, np.inf, vecs.shape[1], dec.residual_subspace_dim, dim, tuple(failures))
    res = np.linalg.norm(u_m @ vecs - vecs * dec.eigenvalues, axis=0) if vecs.size else np.zeros(0)
    norms = np.linalg.norm(vecs, axis=0) if vecs.size else np.zeros(0)
    max_res = float(res.max()) if res.size else 0.0
    max_norm = float(np.abs(norms - 1).max()) if norms.size else 0.0
    for j in np.flatnonzero(res > tol):
        failures.append(f"pair {j} (lambda={dec.eigenvalues[j]:.6g}) residual {res[j]:.3e}")
    for j in np.flatnonzero(np.abs(norms - 1) > tol):
        failures.append(f"eigenvector {j} has norm {norms[j]!r}")
    if vecs.shape[1] + dec.residual_subspace_dim != dim:
        failures.append(
            f"{vecs.shape[1]} reconstructed + {dec.residual_subspace_dim} residual != {dim}"
        )
    return EigenReport(max_res, max_norm, vecs.shape[1], dec.residual_subspace_dim, dim, tuple(failures))


def eigenvalue_multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest gap under the optimal one-to-one matching of two eigenvalue lists."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
