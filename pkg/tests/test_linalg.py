import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from locc_spectrum.errors import ConvergenceError, InvalidDimensionError, NumericError
from locc_spectrum.linalg import (
    eig_hermitian,
    gell_mann_basis,
    hs_distance,
    unitary_from_generators,
)

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


def random_hermitian(rng, d):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return X + X.conj().T


class TestGellMann:
    def test_d2_is_pauli_over_sqrt2(self):
        basis = gell_mann_basis(2)
        np.testing.assert_allclose(basis.generators, PAULI / np.sqrt(2), atol=1e-15)

    def test_d3_orthonormal_all_pairs(self):
        T = gell_mann_basis(3).generators
        assert len(T) == 8
        for a in range(8):
            for b in range(8):
                assert abs(np.trace(T[a] @ T[b]) - (a == b)) < 1e-12

    @pytest.mark.parametrize("d", range(2, 9))
    def test_traceless_orthonormal_hermitian(self, d):
        T = gell_mann_basis(d).generators
        assert T.shape == (d * d - 1, d, d)
        np.testing.assert_allclose(np.trace(T, axis1=1, axis2=2), 0, atol=1e-12)
        gram = np.einsum("aij,bji->ab", T, T)
        np.testing.assert_allclose(gram, np.eye(d * d - 1), atol=1e-12)
        np.testing.assert_allclose(T, np.conj(np.transpose(T, (0, 2, 1))), atol=0)

    def test_block_order(self):
        T = gell_mann_basis(3).generators
        # symmetric (0,1),(0,2),(1,2); antisymmetric; diagonal
        assert T[1][0, 2] == T[1][2, 0] != 0
        assert T[4][0, 2] == -1j / np.sqrt(2)
        np.testing.assert_allclose(np.diag(T[7]).real, np.array([1, 1, -2]) / np.sqrt(6))

    @pytest.mark.parametrize("d", [1, 0, -3, 2.5])
    def test_invalid_dimension(self, d):
        with pytest.raises(InvalidDimensionError):
            gell_mann_basis(d)

    def test_coordinates_round_trip(self):
        rng = np.random.default_rng(3)
        basis = gell_mann_basis(4)
        H = random_hermitian(rng, 4)
        H -= np.trace(H) / 4 * np.eye(4)
        np.testing.assert_allclose(basis.combine(basis.coordinates(H)), H, atol=1e-12)


class TestEigHermitian:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_maximally_mixed(self, d):
        es = eig_hermitian(np.eye(d) / d)
        np.testing.assert_allclose(es.eigenvalues, 1 / d, atol=1e-15)
        np.testing.assert_allclose(es.eigenvectors.conj().T @ es.eigenvectors, np.eye(d), atol=1e-12)

    def test_diagonal(self):
        es = eig_hermitian(np.diag([0.3, 0.7]))
        np.testing.assert_allclose(es.eigenvalues, [0.7, 0.3])
        np.testing.assert_allclose(np.abs(es.eigenvectors), [[0, 1], [1, 0]], atol=1e-15)

    def test_random_d4_residual(self):
        H = random_hermitian(np.random.default_rng(0), 4)
        es = eig_hermitian(H)
        resid = np.linalg.norm(es.reconstruct() - H)
        assert resid <= 1e-10 * max(1, np.linalg.norm(H))

    @pytest.mark.parametrize("seed", range(20))
    def test_against_lapack(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 12))
        H = random_hermitian(rng, d)
        np.testing.assert_allclose(eig_hermitian(H).eigenvalues, np.linalg.eigvalsh(H)[::-1], atol=1e-10)

    def test_degenerate_spectrum(self):
        rng = np.random.default_rng(5)
        U = scipy.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        H = (U * [0.4, 0.4, 0.1, 0.1]) @ U.conj().T
        es = eig_hermitian(H)
        np.testing.assert_allclose(es.eigenvalues, [0.4, 0.4, 0.1, 0.1], atol=1e-12)
        np.testing.assert_allclose(es.eigenvectors.conj().T @ es.eigenvectors, np.eye(4), atol=1e-10)

    def test_symmetrizes_input(self):
        H = np.array([[1.0, 0.5 + 1e-13], [0.5, 2.0]])
        es = eig_hermitian(H)
        np.testing.assert_allclose(es.reconstruct(), (H + H.T) / 2, atol=1e-12)

    def test_non_finite(self):
        with pytest.raises(NumericError):
            eig_hermitian(np.array([[1.0, np.nan], [np.nan, 0.0]]))

    def test_convergence_cap(self):
        with pytest.raises(ConvergenceError):
            eig_hermitian(np.array([[1.0, 0.5], [0.5, 0.0]]), max_sweeps=0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_recovers_known_spectrum(self, d, seed):
        rng = np.random.default_rng(seed)
        lam = rng.normal(size=d)
        U = scipy.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
        H = (U * lam) @ U.conj().T
        es = eig_hermitian(H)
        np.testing.assert_allclose(es.eigenvalues, np.sort(lam)[::-1], atol=1e-10)
        assert np.all(np.diff(es.eigenvalues) <= 0)
        np.testing.assert_allclose(es.eigenvectors.conj().T @ es.eigenvectors, np.eye(d), atol=1e-10)
        assert np.linalg.norm(es.reconstruct() - H) <= 1e-10 * max(1, np.linalg.norm(H))


class TestHsDistance:
    def test_identical(self):
        A = np.diag([0.2, 0.8])
        assert hs_distance(A, A) == 0.0

    def test_orthogonal_projectors(self):
        assert hs_distance(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(np.sqrt(2), abs=1e-15)

    def test_entrywise_oracle(self):
        rng = np.random.default_rng(1)
        A, B = random_hermitian(rng, 5), random_hermitian(rng, 5)
        oracle = np.sqrt(sum(abs(A[i, j] - B[i, j]) ** 2 for i in range(5) for j in range(5)))
        assert hs_distance(A, B) == pytest.approx(oracle, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            hs_distance(np.eye(2), np.eye(3))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_metric_axioms(self, d, seed):
        rng = np.random.default_rng(seed)
        A, B, C = (random_hermitian(rng, d) for _ in range(3))
        ab, ba = hs_distance(A, B), hs_distance(B, A)
        assert ab >= 0
        assert ab == pytest.approx(ba, abs=1e-12)
        assert ab <= hs_distance(A, C) + hs_distance(C, B) + 1e-12


class TestUnitary:
    def test_zero_is_identity(self):
        basis = gell_mann_basis(3)
        np.testing.assert_allclose(unitary_from_generators(np.zeros(8), basis), np.eye(3), atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_unitarity_and_expm(self, d):
        basis = gell_mann_basis(d)
        eta = np.random.default_rng(d).normal(scale=2.0, size=d * d - 1)
        U = unitary_from_generators(eta, basis)
        assert np.linalg.norm(U @ U.conj().T - np.eye(d)) <= 1e-10
        np.testing.assert_allclose(U, scipy.linalg.expm(1j * basis.combine(eta)), atol=1e-10)

    def test_d2_diagonal_closed_form(self):
        basis = gell_mann_basis(2)
        x = 0.83
        U = unitary_from_generators([0, 0, x], basis)
        expected = np.diag([np.exp(1j * x / np.sqrt(2)), np.exp(-1j * x / np.sqrt(2))])
        np.testing.assert_allclose(U, expected, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_negation_is_adjoint(self, d, seed):
        basis = gell_mann_basis(d)
        eta = np.random.default_rng(seed).normal(size=d * d - 1)
        U = unitary_from_generators(eta, basis)
        np.testing.assert_allclose(unitary_from_generators(-eta, basis), U.conj().T, atol=1e-10)

    def test_wrong_length(self):
        with pytest.raises(InvalidDimensionError):
            unitary_from_generators(np.zeros(4), gell_mann_basis(2))
