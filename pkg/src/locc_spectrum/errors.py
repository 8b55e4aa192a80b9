"""Exception types raised across the package."""


class SpectrumEstimationError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(SpectrumEstimationError, ValueError):
    pass


class NumericError(SpectrumEstimationError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class ConvergenceError(SpectrumEstimationError, RuntimeError):
    pass


class ParameterError(SpectrumEstimationError, ValueError):
    """Spectrum parameters outside the simplex, or other bad arguments."""


class SingularModelError(SpectrumEstimationError, ValueError):
    """Parameter on (or numerically at) the boundary where SLD and QFI diverge."""


class DegenerateModelError(SpectrumEstimationError, ValueError):
    """The state has a single distinct eigenvalue (maximally mixed)."""


class HypothesisViolationError(SpectrumEstimationError, ValueError):
    """Inputs do not satisfy the hypothesis of a perturbation check."""
