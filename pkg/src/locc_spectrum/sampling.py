"""Seeded random streams and outcome sampling.

Every stream is a Philox-4x64-10 counter-based generator keyed by
``SeedSequence(master_seed, spawn_key=(stream_index,))``. Philox uses the
standard Random123 round constants (multipliers ``0xD2E7470EE14C6C93``,
``0xCA5A826395121157``; Weyl increments ``0x9E3779B97F4A7C15``,
``0xBB67AE8584CAA73B``), so a given ``(master_seed, stream_index)`` yields the
same draws on every platform. Monte Carlo trial ``t`` uses stream index ``t``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .validation import check_frame, check_positive_int

NEGATIVE_PROB_TOL = 1e-12
NORMALIZATION_TOL = 1e-10


@dataclass
class RngStream:
    """Single-consumer random stream identified by ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < 2**64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")
        if int(self.stream_index) != self.stream_index or self.stream_index < 0:
            raise ParameterError(f"stream_index must be a non-negative integer, got {self.stream_index!r}")
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_index),))
        self._gen = np.random.Generator(np.random.Philox(seq))

    @property
    def generator(self):
        return self._gen


def as_stream(random_state):
    """Coerce ``None``, an int seed or an :class:`RngStream` into a stream.

    ``None`` maps to seed 0: there is no wall-clock seeding anywhere.
    """
    if isinstance(random_state, RngStream):
        return random_state
    if random_state is None:
        return RngStream(0)
    return RngStream(int(random_state))


def projective_probs(rho, frame):
    """Outcome probabilities ``q_k = <psi_k| rho |psi_k>`` of a rank-one projective frame.

    Values down to ``-1e-12`` are clamped to zero and the result is renormalized
    to sum to one; anything further off indicates an invalid state or frame.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    V = check_frame(frame, rho.shape[0])
    q = np.real(np.einsum("ik,ij,jk->k", V.conj(), rho, V))
    if np.any(q < -NEGATIVE_PROB_TOL):
        raise ParameterError(f"negative outcome probability {q.min():.3g}; rho is not a valid state")
    total = q.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ParameterError(f"outcome probabilities sum to {total:.12g}; rho must have unit trace")
    q = np.clip(q, 0.0, 1.0)
    return q / q.sum()


def sample_binomial(n, prob, rng):
    """Draw from ``Bin(n, prob)``.

    Uses numpy's exact sampler (inversion for ``n * min(p, 1-p) < 30``,
    BTPE rejection otherwise), so the law is exactly binomial.
    """
    n = check_positive_int(n, "n", minimum=0)
    if not 0.0 <= prob <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {prob!r}")
    return int(as_stream(rng).generator.binomial(n, prob))


@dataclass(frozen=True)
class OutcomeCounts:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        if int(np.sum(self.counts)) != self.total:
            raise ParameterError("counts do not add up to total")

    @property
    def frequencies(self):
        return self.counts / self.total


def sample_multinomial(n, probs, rng):
    """Draw multinomial counts by sequential conditional binomials.

    Cell ``k`` gets ``Bin(remaining, probs[k] / remaining_mass)``; the last
    cell takes whatever is left.
    """
    n = check_positive_int(n, "n", minimum=0)
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ParameterError("probabilities must be non-negative")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ParameterError(f"probabilities must sum to 1 within 1e-9, got {probs.sum():.12g}")
    stream = as_stream(rng)
    counts = np.zeros(probs.size, dtype=np.int64)
    remaining, mass = n, 1.0
    for k in range(probs.size - 1):
        if remaining == 0:
            break
        cond = min(1.0, probs[k] / mass) if mass > 0 else 0.0
        counts[k] = sample_binomial(remaining, cond, stream)
        remaining -= counts[k]
        mass -= probs[k]
    counts[-1] += remaining
    return OutcomeCounts(counts=counts, total=n)
