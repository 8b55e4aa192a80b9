"""Spectrum submodel rho(p) with its SLDs, QFI and inverse QFI.

Parameters ``p = (p_1, ..., p_{d-1})`` are the free eigenvalues; the last one
is implied, ``p_d = 1 - sum(p)``. SLD and QFI matrices are expressed in the
eigenbasis coordinates. Indices ``k`` are zero-based throughout, so the free
parameters are ``k = 0 .. d-2`` and ``p_d`` sits at position ``d-1``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, ParameterError, SingularModelError
from .validation import check_frame

SIMPLEX_TOL = 1e-12
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumParams:
    """A point of the parameter simplex; ``p`` holds the d-1 free eigenvalues."""

    p: tuple

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if p.ndim != 1 or p.size < 1:
            raise InvalidDimensionError("spectrum parameters must be a non-empty 1-d vector")
        if not np.all(np.isfinite(p)):
            raise ParameterError("spectrum parameters must be finite")
        if np.any(p < -SIMPLEX_TOL) or np.any(p > 1 + SIMPLEX_TOL) or p.sum() > 1 + SIMPLEX_TOL:
            raise ParameterError(
                f"spectrum {tuple(p.tolist())} is outside Theta: entries must lie in [0, 1] "
                "and sum to at most 1"
            )
        object.__setattr__(self, "p", tuple(float(x) for x in p))

    @classmethod
    def from_full(cls, probs):
        """Build from all d eigenvalues (must sum to 1); the last one is dropped."""
        probs = np.asarray(probs, dtype=float)
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ParameterError(f"eigenvalues must sum to 1, got {probs.sum():.12g}")
        return cls(tuple(probs[:-1]))

    @property
    def d(self):
        return len(self.p) + 1

    @property
    def p_last(self):
        return max(0.0, 1.0 - sum(self.p))

    @property
    def full(self):
        """All d eigenvalues, ``(p_1, ..., p_{d-1}, p_d)``."""
        return np.append(np.asarray(self.p), self.p_last)

    @property
    def is_interior(self):
        return bool(np.min(self.full) >= BOUNDARY_TOL)


def _require_interior(params):
    if not params.is_interior:
        raise SingularModelError(
            f"parameter {params.p} is on the boundary (min eigenvalue < {BOUNDARY_TOL:g}); "
            "SLD and QFI diverge there"
        )


def rho_from_spectrum(params, eigenvectors=None):
    """``rho = sum_k p_k |k><k|`` with ``|k>`` the columns of ``eigenvectors``.

    ``eigenvectors`` defaults to the standard basis.
    """
    d = params.d
    V = np.eye(d, dtype=np.complex128) if eigenvectors is None else check_frame(eigenvectors, d, "eigenvectors")
    rho = (V * params.full) @ V.conj().T
    return (rho + rho.conj().T) / 2


def sld(params, k):
    """Symmetric logarithmic derivative for ``p_k`` in eigenbasis coordinates.

    ``diag(..., 1/p_k, ..., -1/p_d)``: it solves
    ``d rho / d p_k = (rho L + L rho)/2`` with ``d rho / d p_k = |k><k| - |d><d|``.
    """
    _require_interior(params)
    d = params.d
    if not 0 <= k < d - 1:
        raise ParameterError(f"parameter index must be in 0..{d - 2}, got {k}")
    full = params.full
    L = np.zeros((d, d), dtype=np.complex128)
    L[k, k] = 1.0 / full[k]
    L[d - 1, d - 1] = -1.0 / full[d - 1]
    return L


def qfi(params):
    """Quantum Fisher information ``H_kl = delta_kl / p_k + 1 / p_d``."""
    _require_interior(params)
    p = np.asarray(params.p)
    return np.diag(1.0 / p) + 1.0 / params.p_last


def qfi_inverse(params):
    """Inverse QFI ``p_k delta_kl - p_k p_l``; valid on the closed simplex."""
    p = np.asarray(params.p)
    return np.diag(p) - np.outer(p, p)
