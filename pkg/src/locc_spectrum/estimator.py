"""Two-stage adaptive LOCC spectrum estimation.

Stage one (plain tomography) measures each generator ``T_a`` with the binary
POVM ``(I +/- T_a)/2`` on ``N_0`` copies and builds a rough estimate
``sigma = I/d + theta_hat . T``. Stage two measures the remaining copies in the
eigenbasis of ``sigma`` and reports outcome frequencies.

Outcome pairing convention: the second-stage frame is ordered by descending
eigenvalue of ``sigma`` and ``p_hat[k]`` is the frequency of frame vector
``k``. Comparisons with a true spectrum sort the truth descending as well.

The functional API (:func:`plain_tomography`, :func:`adaptive_estimate`, ...)
is wrapped by the scikit-learn style estimators :class:`PlainTomography` and
:class:`AdaptiveSpectrumEstimator`, whose ``fit`` consumes copies of a state.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ParameterError
from .linalg import EigenSystem, HermitianBasis, eig_hermitian, gell_mann_basis
from .sampling import OutcomeCounts, as_stream, projective_probs, sample_binomial, sample_multinomial
from .validation import check_density_matrix, check_positive_int


@dataclass(frozen=True)
class CopySplit:
    n_initial: int
    n_final: int
    n_per_generator: int
    mu: float

    def as_tuple(self):
        return (self.n_initial, self.n_final, self.n_per_generator, self.mu)


@dataclass(frozen=True)
class TomographyEstimate:
    theta_hat: np.ndarray
    sigma: np.ndarray
    eigensystem: EigenSystem
    counts_per_generator: np.ndarray
    n_per_generator: int


@dataclass(frozen=True)
class SpectrumEstimate:
    """Result of one adaptive run.

    ``p_hat`` follows the frame order (descending eigenvalues of ``sigma``).
    ``ordering_ambiguous`` flags runs where two eigenvalues of ``sigma`` are
    closer than twice the first-stage noise scale ``sqrt((d^2-1)/N_0)``, so the
    frame order may not match the true eigenvalue order.
    """

    p_hat: np.ndarray
    second_stage_counts: OutcomeCounts
    split: CopySplit
    n_copies: int
    frame: np.ndarray
    tomography: TomographyEstimate
    ordering_ambiguous: bool


def split_copies(N, mu, d):
    """Split ``N`` copies into ``(N_i, N_f, N_0)``.

    ``N_0 = max(1, floor(N**mu / (d**2 - 1)))`` copies per generator,
    ``N_i = N_0 (d**2 - 1)`` for stage one and ``N_f = N - N_i`` for stage two.
    """
    n_gen = d * d - 1
    N = check_positive_int(N, "N", minimum=n_gen)
    if not 0.0 < mu < 1.0:
        raise ParameterError(f"mu must lie in (0, 1), got {mu!r}")
    n0 = max(1, math.floor(N**mu / n_gen))
    n_initial = n0 * n_gen
    n_final = N - n_initial
    if n_final <= 0:
        raise ParameterError(f"N={N} leaves no copies for the second stage (N_i={n_initial})")
    return CopySplit(n_initial, n_final, n0, float(mu))


def _basis_for(rho, basis):
    if basis is None:
        return gell_mann_basis(rho.shape[0])
    if basis.dim != rho.shape[0]:
        raise ParameterError(f"basis dimension {basis.dim} does not match state dimension {rho.shape[0]}")
    return basis


def plain_tomography(rho, n_per_generator, basis=None, rng=None):
    """Estimate ``theta_a = tr(rho T_a)`` from ``N_0`` binary measurements per generator.

    ``w_a ~ Bin(N_0, (1 + theta_a)/2)`` and ``theta_hat_a = 2 w_a / N_0 - 1``.
    ``sigma`` is Hermitian with unit trace but may fail to be positive.
    """
    rho = check_density_matrix(rho)
    basis = _basis_for(rho, basis)
    n0 = check_positive_int(n_per_generator, "n_per_generator")
    stream = as_stream(rng)
    d = rho.shape[0]
    probs = np.clip((1.0 + basis.coordinates(rho)) / 2.0, 0.0, 1.0)
    w = np.array([sample_binomial(n0, pr, stream) for pr in probs], dtype=np.int64)
    theta_hat = 2.0 * w / n0 - 1.0
    sigma = np.eye(d, dtype=np.complex128) / d + basis.combine(theta_hat)
    return TomographyEstimate(
        theta_hat=theta_hat,
        sigma=sigma,
        eigensystem=eig_hermitian(sigma),
        counts_per_generator=w,
        n_per_generator=n0,
    )


def second_stage(rho, frame, n_final, rng=None):
    """Measure ``n_final`` copies in ``frame``; return counts and ``p_hat = N_k / N_f``."""
    n_final = check_positive_int(n_final, "n_final")
    q = projective_probs(rho, frame)
    counts = sample_multinomial(n_final, q, as_stream(rng))
    return counts, counts.counts / n_final


def _ordering_ambiguous(eigenvalues, n0):
    gaps = -np.diff(eigenvalues)
    noise = math.sqrt((eigenvalues.size**2 - 1) / n0)
    return bool(gaps.size and gaps.min() < 2 * noise)


def adaptive_estimate(rho, N, mu, basis=None, rng=None):
    """Run plain tomography on ``N_i`` copies, then measure ``N_f`` copies in sigma's eigenbasis."""
    rho = check_density_matrix(rho)
    basis = _basis_for(rho, basis)
    split = split_copies(N, mu, rho.shape[0])
    stream = as_stream(rng)
    tomo = plain_tomography(rho, split.n_per_generator, basis, stream)
    frame = tomo.eigensystem.eigenvectors
    counts, p_hat = second_stage(rho, frame, split.n_final, stream)
    return SpectrumEstimate(
        p_hat=p_hat,
        second_stage_counts=counts,
        split=split,
        n_copies=int(N),
        frame=frame,
        tomography=tomo,
        ordering_ambiguous=_ordering_ambiguous(tomo.eigensystem.eigenvalues, split.n_per_generator),
    )


class PlainTomography(BaseEstimator):
    """Estimator wrapper around :func:`plain_tomography`.

    Parameters
    ----------
    n_per_generator : int
        Copies measured per generator (``N_0``).
    random_state : int or RngStream, optional
        Seed or stream. ``None`` means seed 0.

    Attributes
    ----------
    theta_ : ndarray
        Estimated generator coordinates.
    sigma_ : ndarray
        Reconstructed (Hermitian, unit-trace) matrix.
    eigensystem_ : EigenSystem
    """

    def __init__(self, n_per_generator=100, random_state=None):
        self.n_per_generator = n_per_generator
        self.random_state = random_state

    def fit(self, rho, y=None):
        est = plain_tomography(rho, self.n_per_generator, rng=as_stream(self.random_state))
        self.estimate_ = est
        self.theta_ = est.theta_hat
        self.sigma_ = est.sigma
        self.eigensystem_ = est.eigensystem
        return self

    def transform(self, rho=None):
        check_is_fitted(self, "sigma_")
        return self.sigma_


class AdaptiveSpectrumEstimator(BaseEstimator):
    """Two-stage adaptive LOCC estimator of a density matrix spectrum.

    ``fit(rho)`` simulates measuring ``n_copies`` copies of ``rho``; the
    estimate is in ``spectrum_`` (frame order, see module docstring).

    Parameters
    ----------
    n_copies : int
        Total number of copies ``N``.
    mu : float
        Stage-one exponent; ``N**mu`` copies go to plain tomography.
    basis : HermitianBasis, optional
        Generators for plain tomography (Gell-Mann by default).
    random_state : int or RngStream, optional
    """

    def __init__(self, n_copies=10_000, mu=0.6, basis=None, random_state=None):
        self.n_copies = n_copies
        self.mu = mu
        self.basis = basis
        self.random_state = random_state

    def fit(self, rho, y=None):
        est = adaptive_estimate(rho, self.n_copies, self.mu, self.basis, as_stream(self.random_state))
        self.estimate_ = est
        self.spectrum_ = est.p_hat
        self.frame_ = est.frame
        self.sigma_ = est.tomography.sigma
        self.split_ = est.split
        return self

    def predict(self, rho=None):
        """Return the estimated spectrum (``rho`` is ignored; kept for API symmetry)."""
        check_is_fitted(self, "spectrum_")
        return self.spectrum_

    def fit_predict(self, rho, y=None):
        return self.fit(rho).predict()


__all__ = [
    "AdaptiveSpectrumEstimator",
    "CopySplit",
    "HermitianBasis",
    "PlainTomography",
    "SpectrumEstimate",
    "TomographyEstimate",
    "adaptive_estimate",
    "plain_tomography",
    "second_stage",
    "split_copies",
]
