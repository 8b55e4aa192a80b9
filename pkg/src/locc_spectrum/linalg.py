"""Small complex Hermitian linear algebra.

Everything here works on dense ``numpy`` arrays of dimension ``d <= ~16``:
generalized Gell-Mann bases, a cyclic Jacobi eigensolver, the Hilbert-Schmidt
distance and unitaries generated by ``exp(i eta . T)``.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConvergenceError, InvalidDimensionError, NumericError
from .validation import check_square_matrix

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-13


@dataclass(frozen=True)
class HermitianBasis:
    """Orthonormal traceless Hermitian generators ``T_a``, ``tr(T_a T_b) = delta_ab``.

    ``generators`` has shape ``(d**2 - 1, d, d)``.
    """

    dim: int
    generators: np.ndarray

    def __len__(self):
        return self.generators.shape[0]

    def coordinates(self, A):
        """Return ``tr(A T_a)`` for every generator (real part)."""
        return np.real(np.einsum("ij,aji->a", A, self.generators))

    def combine(self, coeffs):
        """Return ``sum_a coeffs[a] T_a``."""
        return np.einsum("a,aij->ij", np.asarray(coeffs, dtype=float), self.generators)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending; column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def gell_mann_basis(d):
    """Generalized Gell-Mann basis of su(d), normalized to ``tr(T_a^2) = 1``.

    Ordering: the (d**2-d)/2 symmetric generators ``(E_jk + E_kj)/sqrt(2)``,
    then the antisymmetric ones ``(-i E_jk + i E_kj)/sqrt(2)``, both over
    ``j < k`` in lexicographic order, then the d-1 diagonal generators
    ``diag(1, ..., 1, -l, 0, ..., 0)/sqrt(l(l+1))`` for ``l = 1..d-1``.
    For ``d = 2`` this is ``(sigma_x, sigma_y, sigma_z)/sqrt(2)``.
    """
    if isinstance(d, bool) or int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    pairs = list(combinations(range(d), 2))
    gens = np.zeros((d * d - 1, d, d), dtype=np.complex128)
    s = 1 / np.sqrt(2)
    n = len(pairs)
    for i, (j, k) in enumerate(pairs):
        gens[i, j, k] = gens[i, k, j] = s
        gens[n + i, j, k] = -1j * s
        gens[n + i, k, j] = 1j * s
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        gens[2 * n + l - 1] = np.diag(diag / np.sqrt(l * (l + 1)))
    return HermitianBasis(dim=d, generators=gens)


def _off_norm(A):
    off = A - np.diag(np.diag(A))
    return np.linalg.norm(off)


def eig_hermitian(H, tol=OFFDIAG_TOL, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi rotations.

    The input is symmetrized as ``(H + H^dagger)/2`` first. Sweeps stop once the
    off-diagonal Frobenius norm is below ``tol * max(1, ||H||_HS)``.

    Each rotation on the pair ``(p, q)`` first removes the phase of ``A[p, q]``
    with ``diag(1, exp(-i phi))`` and then applies the real symmetric Jacobi
    rotation, so the update stays exactly unitary.

    Raises
    ------
    NumericError
        Non-finite entries.
    ConvergenceError
        Off-diagonal mass still above threshold after ``max_sweeps`` sweeps.
    """
    A = check_square_matrix(H, "H", min_dim=1)
    A = (A + A.conj().T) / 2
    d = A.shape[0]
    V = np.eye(d, dtype=np.complex128)
    threshold = tol * max(1.0, np.linalg.norm(A))
    pairs = list(combinations(range(d), 2))

    sweeps = 0
    while _off_norm(A) > threshold:
        if sweeps == max_sweeps:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p, q in pairs:
            apq = A[p, q]
            mag = abs(apq)
            if mag == 0.0:
                continue
            phase = apq / mag
            app, aqq = A[p, p].real, A[q, q].real
            tau = (aqq - app) / (2 * mag)
            t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            # W = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            W = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
            idx = [p, q]
            A[:, idx] = A[:, idx] @ W
            A[idx, :] = W.conj().T @ A[idx, :]
            A[p, q] = A[q, p] = 0.0
            A[p, p] = app - t * mag
            A[q, q] = aqq + t * mag
            V[:, idx] = V[:, idx] @ W

    vals = np.real(np.diag(A)).copy()
    order = np.argsort(-vals, kind="stable")
    return EigenSystem(eigenvalues=vals[order], eigenvectors=V[:, order])


def hs_distance(A, B):
    """Hilbert-Schmidt distance ``sqrt(tr((A - B)^2))`` between Hermitian matrices."""
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.shape != B.shape:
        raise InvalidDimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    D = A - B
    return float(np.sqrt(max(0.0, np.trace(D @ D).real)))


def unitary_from_generators(eta, basis):
    """Return ``exp(i sum_a eta_a T_a)`` via eigendecomposition of the exponent."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (len(basis),):
        raise InvalidDimensionError(f"eta must have length {len(basis)}, got shape {eta.shape}")
    if not np.all(np.isfinite(eta)):
        raise NumericError("eta has non-finite entries")
    es = eig_hermitian(basis.combine(eta))
    V = es.eigenvectors
    return (V * np.exp(1j * es.eigenvalues)) @ V.conj().T
