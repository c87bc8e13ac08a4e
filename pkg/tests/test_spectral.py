import numpy as np
import pytest

from instances import TWO_K4_U2, cycle10, two_k4, random_family, random_marked, two_vertex
from sqw.spectral import (
    discriminant,
    eigenvalue_multiset_distance,
    spectral_decomposition,
    verify_eigensystem,
)
from sqw.staggered import evolution_operator, modified_beta, search_operator
from sqw.tessellation import TessellationError


def max_abs(a):
    return float(np.max(np.abs(a)))


class TestDiscriminant:
    def test_identical_is_identity(self):
        _, blue, _ = cycle10()
        assert max_abs(discriminant(blue, blue) - np.eye(5)) <= 1e-15

    def test_two_vertex(self):
        th = 1.0
        _, alpha, beta = two_vertex(th)
        d = discriminant(alpha, beta)
        expected = np.cos(th / 2) / np.sqrt(2) + np.sin(th / 2) / np.sqrt(2)
        assert d.shape == (1, 1) and abs(d[0, 0] - expected) <= 1e-15
        assert abs(np.linalg.svd(d, compute_uv=False)[0] - np.cos(np.pi / 4 - th / 2)) <= 1e-15

    def test_two_k4_brute_force(self):
        _, alpha, beta = two_k4()
        amps_a = [{0: 0.5, 1: 0.5, 2: 0.5, 3: 0.5}, {4: 2**-0.5, 5: 2**-0.5}]
        amps_b = [{0: 2**-0.5, 1: 2**-0.5}, {2: 0.5, 3: 0.5, 4: 0.5, 5: 0.5}]
        ref = np.array([[sum(a.get(v, 0) * b.get(v, 0) for v in range(6)) for b in amps_b] for a in amps_a])
        assert max_abs(discriminant(alpha, beta) - ref) <= 1e-15

    def test_mismatch(self):
        _, blue, _ = cycle10()
        _, alpha, _ = two_k4()
        with pytest.raises(TessellationError):
            discriminant(blue, alpha)

    def test_singular_values_bounded(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            _, (a, b) = random_family(rng, int(rng.integers(1, 30)))
            marked = random_marked(rng, a.n, int(rng.integers(0, 3)))
            sv = np.linalg.svd(discriminant(a, modified_beta(b, marked)), compute_uv=False)
            assert np.all(sv <= 1 + 1e-10) and np.all(sv >= 0)


class TestDecomposition:
    def test_identical_tessellations(self):
        _, blue, _ = cycle10()
        dec = spectral_decomposition(blue, blue)
        assert dec.s == 0
        assert dec.unit_left.shape[1] == 5
        assert dec.residual_subspace_dim == 5
        assert np.allclose(dec.full_spectrum(), 1)

    def test_two_vertex(self):
        th = 1.0
        _, alpha, beta = two_vertex(th)
        dec = spectral_decomposition(alpha, beta)
        gap = np.pi / 4 - th / 2
        assert dec.s == 1 and abs(dec.angles[0] - gap) <= 1e-12
        direct = np.linalg.eigvals(evolution_operator([alpha, beta]))
        assert eigenvalue_multiset_distance(dec.full_spectrum(), direct) <= 1e-12
        assert eigenvalue_multiset_distance(dec.eigenvalues, np.exp([2j * gap, -2j * gap])) <= 1e-12

    def test_two_k4_sixth_roots(self):
        _, alpha, beta = two_k4()
        dec = spectral_decomposition(alpha, beta)
        assert np.all(np.abs(dec.full_spectrum() ** 6 - 1) <= 1e-10)
        rep = verify_eigensystem(TWO_K4_U2 / 2, dec)
        assert rep.ok and rep.max_residual <= 1e-8

    def test_singular_vector_relations(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            _, (a, b) = random_family(rng, int(rng.integers(2, 30)))
            marked = random_marked(rng, a.n, int(rng.integers(0, 3)))
            dec = spectral_decomposition(a, b, marked)
            d = discriminant(a, modified_beta(b, marked) if marked else b)
            cos = np.cos(dec.angles)
            if dec.s:
                assert max_abs(d @ dec.nu - dec.mu * cos) <= 1e-10
                assert max_abs(d.conj().T @ dec.mu - dec.nu * cos) <= 1e-10
            inner = np.sum((dec.singular_values > 1e-9) & (dec.singular_values < 1 - 1e-9))
            assert dec.s == inner

    def test_random_large_marked(self):
        rng = np.random.default_rng(2)
        _, (a, b) = random_family(rng, 40, max_size=5)
        marked = random_marked(rng, 40, 2)
        dec = spectral_decomposition(a, b, marked)
        rep = verify_eigensystem(search_operator(a, b, marked), dec)
        assert rep.ok, rep.failures

    def test_eigenvectors_orthonormal(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            _, (a, b) = random_family(rng, int(rng.integers(2, 30)), max_size=4)
            marked = random_marked(rng, a.n, int(rng.integers(0, 3)))
            dec = spectral_decomposition(a, b, marked)
            v = dec.eigenvectors
            assert max_abs(v.conj().T @ v - np.eye(v.shape[1])) <= 1e-8

    def test_no_marks_matches_plain_walk(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            _, (a, b) = random_family(rng, int(rng.integers(2, 25)))
            dec = spectral_decomposition(a, b, [])
            direct = np.linalg.eigvals(evolution_operator([a, b]))
            assert eigenvalue_multiset_distance(dec.full_spectrum(), direct) <= 1e-8

    def test_bad_tol(self):
        _, blue, red = cycle10()
        with pytest.raises(ValueError):
            spectral_decomposition(blue, red, tol=0)


class TestVerify:
    def test_identity_walk(self):
        _, blue, _ = cycle10()
        dec = spectral_decomposition(blue, blue)
        assert verify_eigensystem(np.eye(10), dec).ok

    def test_detects_wrong_operator(self):
        _, alpha, beta = two_k4()
        dec = spectral_decomposition(alpha, beta)
        rep = verify_eigensystem(-TWO_K4_U2 / 2, dec)
        assert not rep.ok

    def test_dimension_mismatch(self):
        _, alpha, beta = two_k4()
        dec = spectral_decomposition(alpha, beta)
        assert not verify_eigensystem(np.eye(3), dec).ok


def test_multiset_distance():
    assert eigenvalue_multiset_distance([1, 1j], [1j, 1]) == 0
    assert eigenvalue_multiset_distance([1], [1, 1]) == np.inf
    assert abs(eigenvalue_multiset_distance([1, -1], [1.1, -1]) - 0.1) <= 1e-15
