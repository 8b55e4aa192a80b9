"""Adaptive two-stage LOCC estimation of the spectrum of a density matrix.

Plain tomography on ``N**mu`` copies gives a rough estimate ``sigma``; the
remaining copies are measured in the eigenbasis of ``sigma``. For ``mu > 1/2``
the scaled MSE tends to the inverse quantum Fisher information of the
spectrum model. The package simulates the procedure, benchmarks it against
that bound, and numerically checks the perturbation and tail bounds behind it.
"""

__version__ = "0.1.0"

from .bench import MseReport, conditional_mse_closed_form, mse_monte_carlo, mu_threshold_sweep
from .entangle import (
    BipartitePureState,
    EntanglementEstimator,
    entanglement_entropy,
    estimate_entanglement,
    reduced_state,
    schmidt_spectrum,
)
from .errors import (
    ConvergenceError,
    DegenerateModelError,
    HypothesisViolationError,
    InvalidDimensionError,
    NumericError,
    ParameterError,
    SingularModelError,
    SpectrumEstimationError,
)
from .estimator import (
    AdaptiveSpectrumEstimator,
    PlainTomography,
    adaptive_estimate,
    plain_tomography,
    second_stage,
    split_copies,
)
from .lemma_verify import (
    check_lemma1,
    chernoff_bound,
    empirical_tail,
    perturbed_sigma,
    spectral_structure,
    tail_probability_bound,
)
from .linalg import EigenSystem, HermitianBasis, eig_hermitian, gell_mann_basis, hs_distance, unitary_from_generators
from .model import SpectrumParams, qfi, qfi_inverse, rho_from_spectrum, sld
from .sampling import OutcomeCounts, RngStream, projective_probs, sample_binomial, sample_multinomial
