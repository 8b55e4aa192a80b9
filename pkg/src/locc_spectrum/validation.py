"""Input validation helpers shared by the estimators and numerical suites.

These follow the ``check_*`` convention of scikit-learn: each takes raw user
input, returns a cleaned ``numpy`` array, and raises a package error otherwise.
"""

import numpy as np

from .errors import InvalidDimensionError, NumericError, ParameterError

HERMITIAN_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10


def check_square_matrix(A, name="matrix", min_dim=2):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidDimensionError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] < min_dim:
        raise InvalidDimensionError(f"{name} must have dimension >= {min_dim}, got {A.shape[0]}")
    if not np.all(np.isfinite(A)):
        raise NumericError(f"{name} has non-finite entries")
    return A


def check_hermitian(A, name="matrix", tol=HERMITIAN_TOL):
    A = check_square_matrix(A, name)
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.conj().T)) > tol * scale:
        raise NumericError(f"{name} is not Hermitian within {tol:g}")
    return A


def check_density_matrix(rho, name="rho", tol=1e-10):
    """Validate a density matrix: Hermitian, unit trace, no eigenvalue below ``-tol``."""
    rho = check_hermitian(rho, name)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ParameterError(f"{name} must have unit trace, got {tr.real:.6g}")
    lowest = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lowest < -tol:
        raise ParameterError(f"{name} is not positive semidefinite (min eigenvalue {lowest:.3g})")
    return rho


def check_frame(frame, dim=None, name="frame", tol=ORTHONORMAL_TOL):
    """Return the ``d x d`` matrix of orthonormal columns held by ``frame``.

    ``frame`` may be a plain array or anything carrying an ``eigenvectors``
    attribute (an :class:`~locc_spectrum.linalg.EigenSystem`).
    """
    frame = getattr(frame, "eigenvectors", frame)
    V = check_square_matrix(frame, name)
    if dim is not None and V.shape[0] != dim:
        raise InvalidDimensionError(f"{name} has dimension {V.shape[0]}, expected {dim}")
    gram = V.conj().T @ V
    if np.max(np.abs(gram - np.eye(V.shape[0]))) > tol:
        raise ParameterError(f"{name} columns are not orthonormal within {tol:g}")
    return V


def check_probability_vector(p, name="probs", tol=1e-9):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise NumericError(f"{name} has non-finite entries")
    if np.any(p < 0):
        raise ParameterError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > tol:
        raise ParameterError(f"{name} must sum to 1 within {tol:g}, got {p.sum():.12g}")
    return p


def check_positive_int(n, name, minimum=1):
    if isinstance(n, bool) or int(n) != n:
        raise ParameterError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {n}")
    return n
