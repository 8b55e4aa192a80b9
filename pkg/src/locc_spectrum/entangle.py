"""Pure-state bipartite entanglement via spectrum estimation of the reduced state.

A state ``|psi> = sum_ij C_ij |i> (x) |e_j>`` is stored as its amplitude matrix
``C``; the reduced state is ``rho_A = C C^dagger`` and its eigenvalues are the
squared Schmidt coefficients. Estimation only touches subsystem A.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ParameterError
from .estimator import adaptive_estimate
from .linalg import eig_hermitian
from .sampling import as_stream
from .validation import check_square_matrix

NORM_TOL = 1e-12


@dataclass(frozen=True)
class BipartitePureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        C = check_square_matrix(self.amplitudes, "amplitudes")
        norm = np.sum(np.abs(C) ** 2)
        if abs(norm - 1.0) > NORM_TOL:
            raise ParameterError(f"amplitudes must have unit norm, got {norm:.12g}")
        object.__setattr__(self, "amplitudes", C)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @classmethod
    def from_schmidt(cls, probs, frame_a=None, frame_b=None):
        """``sum_k sqrt(p_k) |a_k> (x) |b_k>`` for orthonormal columns ``a_k``, ``b_k``."""
        probs = np.asarray(probs, dtype=float)
        d = probs.size
        A = np.eye(d) if frame_a is None else np.asarray(frame_a)
        B = np.eye(d) if frame_b is None else np.asarray(frame_b)
        # C_ij = sum_k sqrt(p_k) A_ik B_jk
        return cls((A * np.sqrt(probs)) @ B.T)

    @classmethod
    def bell(cls, d=2):
        return cls.from_schmidt(np.full(d, 1.0 / d))

    @classmethod
    def product(cls, d=2):
        p = np.zeros(d)
        p[0] = 1.0
        return cls.from_schmidt(p)


def reduced_state(psi):
    """``rho_A = tr_B |psi><psi| = C C^dagger``."""
    C = psi.amplitudes
    rho = C @ C.conj().T
    return (rho + rho.conj().T) / 2


def schmidt_spectrum(psi):
    """Squared Schmidt coefficients, descending."""
    vals = eig_hermitian(reduced_state(psi)).eigenvalues
    vals = np.clip(vals, 0.0, None)
    return vals / vals.sum()


def entanglement_entropy(p):
    """``-sum_k p_k log2 p_k`` in bits, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ParameterError("probabilities must be non-negative")
    nz = p[p > 0]
    return float(max(0.0, -np.sum(nz * np.log2(nz))))


def estimate_entanglement(psi, N, mu, rng=None, basis=None):
    """Plug-in entropy of the adaptive spectrum estimate of ``rho_A`` (no bias correction)."""
    est = adaptive_estimate(reduced_state(psi), N, mu, basis, as_stream(rng))
    return entanglement_entropy(est.p_hat)


class EntanglementEstimator(BaseEstimator):
    """Estimator form of :func:`estimate_entanglement`; ``fit`` takes a :class:`BipartitePureState`."""

    def __init__(self, n_copies=10_000, mu=0.6, random_state=None):
        self.n_copies = n_copies
        self.mu = mu
        self.random_state = random_state

    def fit(self, psi, y=None):
        if not isinstance(psi, BipartitePureState):
            psi = BipartitePureState(np.asarray(psi))
        est = adaptive_estimate(reduced_state(psi), self.n_copies, self.mu, rng=as_stream(self.random_state))
        self.spectrum_ = est.p_hat
        self.entropy_ = entanglement_entropy(est.p_hat)
        return self

    def predict(self, psi=None):
        check_is_fitted(self, "entropy_")
        return self.entropy_
