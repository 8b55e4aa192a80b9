"""Numerical checks of the eigen-perturbation lemma and of the first-stage tail bounds.

The perturbation lemma: if ``d_HS(rho, sigma) <= delta < Delta / (1 + sqrt(d))``
where ``Delta`` is the smallest gap between distinct eigenvalues ``p_a`` of
``rho``, then, writing ``sigma = sum_k s_k |psi_k><psi_k|`` and
``O_ak = <psi_k| Pi_a |psi_k>``,

1. ``|p_a - s_k| sqrt(O_ak) <= delta`` for all ``a, k``;
2. the matching sets ``M_a = {k : |p_a - s_k| <= delta}`` are non-empty, every
   ``k`` belongs to some ``M_a``, and the sets are pairwise disjoint;
3. for ``k`` in ``M_b`` and ``a != b``: ``|p_a - s_k| >= Delta - delta`` and
   ``sqrt(O_ak) <= delta / (Delta - delta)``;
4. ``|M_a|`` equals the degeneracy ``d_a = tr Pi_a``;
5. for ``k`` in ``M_a``: ``|p_a - <psi_k|rho|psi_k>| <= c delta**2`` with
   ``c = 4 (d - 1) / Delta``.

Inequalities are checked with slack ``1e-9``.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import binom

from .bench import first_stage_bias
from .errors import DegenerateModelError, HypothesisViolationError, ParameterError
from .linalg import eig_hermitian, gell_mann_basis, hs_distance, unitary_from_generators
from .sampling import RngStream, as_stream
from .validation import check_hermitian, check_positive_int

MERGE_TOL = 1e-9
SLACK = 1e-9
POINTS = (1, 2, 3, 4, 5)
PERTURBATION_MODES = ("rotation", "shift", "combined")


@dataclass(frozen=True)
class SpectralStructure:
    """Distinct eigenvalues (descending) of a state with their eigenprojectors."""

    values: np.ndarray
    projectors: np.ndarray
    degeneracies: tuple
    gap: float

    @property
    def dim(self):
        return self.projectors.shape[1]

    @property
    def n_distinct(self):
        return self.values.size

    @property
    def c(self):
        """Constant ``4 (d - 1) / Delta`` of the second-order eigenvalue bound."""
        return 4 * (self.dim - 1) / self.gap

    @property
    def admissible_radius(self):
        """Perturbations must satisfy ``delta < Delta / (1 + sqrt(d))``."""
        return self.gap / (1 + math.sqrt(self.dim))


def spectral_structure(rho, merge_tol=MERGE_TOL):
    """Cluster the eigenvalues of ``rho`` (within ``merge_tol``) into distinct levels."""
    rho = check_hermitian(rho, "rho")
    es = eig_hermitian(rho)
    vals, V = es.eigenvalues, es.eigenvectors
    groups = [[0]]
    for k in range(1, vals.size):
        if vals[groups[-1][0]] - vals[k] <= merge_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    if len(groups) < 2:
        raise DegenerateModelError("state has a single distinct eigenvalue (maximally mixed)")
    values = np.array([vals[g].mean() for g in groups])
    projectors = np.array([V[:, g] @ V[:, g].conj().T for g in groups])
    return SpectralStructure(
        values=values,
        projectors=projectors,
        degeneracies=tuple(len(g) for g in groups),
        gap=float(np.min(-np.diff(values))),
    )


@dataclass
class MatchingSets:
    delta: float
    sets: list

    @property
    def sizes(self):
        return [len(s) for s in self.sets]

    def disjoint(self):
        seen = set()
        for s in self.sets:
            if seen & set(s):
                return False
            seen |= set(s)
        return True

    def exhaustive(self, d):
        return set().union(*map(set, self.sets)) == set(range(d))


def matching_sets(structure, sigma_eigenvalues, delta):
    """``M_a = {k : |p_a - s_k| <= delta}`` for every distinct eigenvalue ``p_a``."""
    s = np.asarray(sigma_eigenvalues)
    return MatchingSets(
        delta=float(delta),
        sets=[np.flatnonzero(np.abs(pa - s) <= delta + SLACK).tolist() for pa in structure.values],
    )


@dataclass
class ViolationReport:
    """Violation counts and worst margins per lemma point.

    A margin is ``bound - observed``; negative margins beyond the slack are
    violations. Points 2 and 4 are combinatorial: the point-2 margin is the
    worst ``delta - distance`` to the nearest partner eigenvalue, the point-4
    margin the smallest ``|distance - delta|`` (how close any ``k`` came to
    switching sets), or minus the number of mismatched sets.
    """

    samples_tested: int = 0
    violations: dict = field(default_factory=lambda: {p: 0 for p in POINTS})
    worst_margins: dict = field(default_factory=lambda: {p: math.inf for p in POINTS})

    @property
    def total_violations(self):
        return sum(self.violations.values())

    def record(self, point, margin):
        self.worst_margins[point] = min(self.worst_margins[point], float(margin))

    def merge(self, other):
        out = ViolationReport(samples_tested=self.samples_tested + other.samples_tested)
        for p in POINTS:
            out.violations[p] = self.violations[p] + other.violations[p]
            out.worst_margins[p] = min(self.worst_margins[p], other.worst_margins[p])
        return out

    def to_dict(self):
        return {
            "samples_tested": self.samples_tested,
            "violations": {str(p): v for p, v in self.violations.items()},
            "worst_margins": {str(p): (None if math.isinf(m) else m) for p, m in self.worst_margins.items()},
            "total_violations": self.total_violations,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def check_lemma1(rho, sigma, delta, structure=None):
    """Evaluate all five assertions of the perturbation lemma on one ``(rho, sigma)``."""
    structure = structure or spectral_structure(rho)
    dist = hs_distance(rho, sigma)
    if dist > delta + 1e-12:
        raise HypothesisViolationError(f"d_HS(rho, sigma) = {dist:.6g} exceeds delta = {delta:.6g}")
    if not delta < structure.admissible_radius:
        raise HypothesisViolationError(
            f"delta = {delta:.6g} is not below Delta/(1+sqrt(d)) = {structure.admissible_radius:.6g}"
        )

    rho = np.asarray(rho, dtype=np.complex128)
    es = eig_hermitian(sigma)
    s, psi = es.eigenvalues, es.eigenvectors
    p = structure.values
    n, d = p.size, s.size
    overlap = np.clip(np.real(np.einsum("ik,aij,jk->ak", psi.conj(), structure.projectors, psi)), 0.0, None)
    dist_ak = np.abs(p[:, None] - s[None, :])
    report = ViolationReport(samples_tested=1)

    def check(point, margin):
        report.record(point, margin)
        if margin < -SLACK:
            report.violations[point] += 1

    # point 1
    check(1, np.min(delta - dist_ak * np.sqrt(overlap)))

    # point 2
    ms = matching_sets(structure, s, delta)
    ok = all(ms.sizes) and ms.exhaustive(d) and ms.disjoint()
    margin2 = min(np.min(delta - dist_ak.min(axis=1)), np.min(delta - dist_ak.min(axis=0)))
    report.record(2, margin2)
    if not ok:
        report.violations[2] += 1

    # point 3
    radius = delta / (structure.gap - delta)
    margins3 = []
    for b, Mb in enumerate(ms.sets):
        for k in Mb:
            for a in range(n):
                if a == b:
                    continue
                margins3.append(dist_ak[a, k] - (structure.gap - delta))
                margins3.append(radius - math.sqrt(overlap[a, k]))
    if margins3:
        check(3, min(margins3))

    # point 4
    mismatched = sum(m != da for m, da in zip(ms.sizes, structure.degeneracies))
    report.record(4, -float(mismatched) if mismatched else float(np.min(np.abs(dist_ak - delta))))
    if mismatched:
        report.violations[4] += 1

    # point 5
    expect = np.real(np.einsum("ik,ij,jk->k", psi.conj(), rho, psi))
    bound = structure.c * delta**2
    margins5 = [bound - abs(p[a] - expect[k]) for a, Ma in enumerate(ms.sets) for k in Ma]
    if margins5:
        check(5, min(margins5))
    return report


def perturbed_sigma(rho, delta, rng=None, basis=None, mode=None, return_mode=False):
    """Random ``sigma = U (rho + D) U^dagger`` with ``d_HS(rho, sigma) <= delta``.

    ``D`` is a trace-zero shift diagonal in the eigenbasis of ``rho`` and
    ``U = exp(i eta . T)``. ``mode`` picks ``"rotation"`` (``D = 0``),
    ``"shift"`` (``eta = 0``) or ``"combined"``; by default it is drawn
    uniformly. The perturbation is scaled by bisection so the distance is a
    random fraction of ``delta``, occasionally ``delta`` itself.

    With ``return_mode=True`` returns ``(sigma, mode)``.
    """
    rho = check_hermitian(rho, "rho")
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    if delta == 0:
        return (rho.copy(), mode) if return_mode else rho.copy()
    gen = as_stream(rng).generator
    d = rho.shape[0]
    basis = basis or gell_mann_basis(d)
    if mode is None:
        mode = PERTURBATION_MODES[int(gen.integers(3))]
    if mode not in PERTURBATION_MODES:
        raise ParameterError(f"unknown perturbation mode {mode!r}")

    V = eig_hermitian(rho).eigenvectors
    x = np.zeros(d)
    eta = np.zeros(len(basis))
    if mode != "rotation":
        x = gen.normal(size=d)
        x -= x.mean()
        x /= np.linalg.norm(x)
    if mode != "shift":
        eta = gen.normal(size=len(basis))
        eta /= np.linalg.norm(eta)
    target = delta * (1.0 if gen.random() < 0.2 else gen.uniform(0.05, 1.0))

    # exp(i s eta.T) = W diag(exp(i s w)) W^dagger, so diagonalize eta.T once
    gen_es = eig_hermitian(basis.combine(eta))
    W, w = gen_es.eigenvectors, gen_es.eigenvalues

    def build(scale):
        D = (V * (scale * x)) @ V.conj().T
        U = (W * np.exp(1j * scale * w)) @ W.conj().T
        out = U @ (rho + D) @ U.conj().T
        return (out + out.conj().T) / 2

    hi = 1.0
    while hs_distance(rho, build(hi)) < target and hi < 1e6:
        hi *= 2
    lo = 0.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if hs_distance(rho, build(mid)) <= target:
            lo = mid
        else:
            hi = mid
    sigma = build(lo)
    if hs_distance(rho, sigma) > delta:
        sigma = rho.copy()
    return (sigma, mode) if return_mode else sigma


def random_state_with_gap(d, rng, degenerate=False, min_gap=0.02):
    """Random state in a random eigenframe with at least two levels ``min_gap`` apart.

    With ``degenerate=True`` (and ``d > 2``) one eigenvalue is repeated.
    """
    gen = as_stream(rng).generator
    basis = gell_mann_basis(d)
    while True:
        p = gen.dirichlet(np.ones(d))
        if degenerate and d > 2:
            i, j = gen.choice(d, size=2, replace=False)
            p[j] = p[i]
            p /= p.sum()
        p = np.sort(p)[::-1]
        levels = np.unique(np.round(p, 12))
        if levels.size >= 2 and np.min(np.diff(levels)) >= min_gap:
            break
    U = unitary_from_generators(gen.normal(scale=3.0, size=len(basis)), basis)
    return (U * p) @ U.conj().T


def lemma1_suite(n_samples, master_seed=0, dims=(2, 3, 4), degenerate_fraction=0.3):
    """Randomized check of the perturbation lemma over ``n_samples`` admissible instances.

    Sample ``i`` uses stream ``i``; it picks ``d`` from ``dims``, a state
    (degenerate with probability ``degenerate_fraction``, and the fixed
    ``diag(0.4, 0.4, 0.2)`` for every 50th sample), ``delta`` uniform below the
    admissible radius, and a perturbed ``sigma``.
    """
    n_samples = check_positive_int(n_samples, "n_samples")
    total = ViolationReport()
    fixed = np.diag([0.4, 0.4, 0.2]).astype(np.complex128)
    for i in range(n_samples):
        stream = RngStream(master_seed, i)
        gen = stream.generator
        if i % 50 == 0:
            rho = fixed
        else:
            d = int(dims[int(gen.integers(len(dims)))])
            rho = random_state_with_gap(d, stream, degenerate=gen.random() < degenerate_fraction)
        structure = spectral_structure(rho)
        delta = structure.admissible_radius * gen.uniform(0.01, 0.999)
        sigma = perturbed_sigma(rho, delta, stream)
        total = total.merge(check_lemma1(rho, sigma, delta, structure))
    return total


def chernoff_bound(n, lam):
    """Two-sided tail bound ``2 exp(-2 lam^2 / n)`` for ``Bin(n, p)``."""
    n = check_positive_int(n, "n")
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    return 2.0 * math.exp(-2.0 * lam * lam / n)


def exact_binomial_tail(n, p, lam):
    """``Pr[|X - n p| >= lam]`` for ``X ~ Bin(n, p)`` by summing the pmf.

    The deviation test is done in exact integer arithmetic (``p`` and ``lam``
    read as their decimal strings), so ties at ``|k - n p| = lam`` count as
    in the tail.
    """
    n = check_positive_int(n, "n")
    center = n * Fraction(str(p))
    lam = Fraction(str(lam))
    den = center.denominator * lam.denominator
    ks = np.arange(n + 1, dtype=np.int64)
    dev = np.abs(ks * den - center.numerator * lam.denominator)
    mask = dev >= lam.numerator * center.denominator
    return math.fsum(binom.pmf(ks[mask], n, p))


def chernoff_grid_check(ns=(10, 100, 1000), ps=(0.1, 0.3, 0.5)):
    """Compare the bound with exact tails for integer ``lam`` in ``0..n/2``.

    Returns ``(n_checked, exceptions)`` where exceptions lists
    ``(n, p, lam, exact, bound)`` tuples with ``exact > bound``.
    """
    checked, exceptions = 0, []
    for n in ns:
        for p in ps:
            for lam in range(n // 2 + 1):
                exact = exact_binomial_tail(n, p, lam)
                bound = chernoff_bound(n, lam)
                checked += 1
                if exact > bound:
                    exceptions.append((n, p, lam, exact, bound))
    return checked, exceptions


def _tail_gap(structure):
    return structure if isinstance(structure, (int, float)) else structure.gap


def log_tail_probability_bound(epsilon, N, mu, rho_structure, d=None):
    """Natural log of :func:`tail_probability_bound` (usable for astronomically large ``N``)."""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    d = d if d is not None else rho_structure.dim
    gap = _tail_gap(rho_structure)
    if gap <= 0:
        raise ParameterError("spectral gap must be positive")
    c = 4 * (d - 1) / gap
    n_gen = d * d - 1
    return math.log(2 * n_gen) - epsilon * float(N) ** (mu - 0.5) / (2 * c * n_gen**2)


def tail_probability_bound(epsilon, N, mu, rho_structure, d=None):
    """Upper bound on ``Pr[sqrt(N) |q_k - p_k| >= epsilon]`` after plain tomography on ``N**mu`` copies.

    ``2 (d^2-1) exp(-epsilon N^(mu-1/2) / (2 c (d^2-1)^2))`` with
    ``c = 4 (d-1) / Delta``. ``rho_structure`` is a :class:`SpectralStructure`
    or the gap ``Delta`` itself (then ``d`` is required).
    """
    return math.exp(log_tail_probability_bound(epsilon, N, mu, rho_structure, d))


def empirical_tail(params, frame, N, mu, epsilon, trials, master_seed=0):
    """Fraction of first stages with ``max_k sqrt(N) |q_k - p_k| >= epsilon``.

    ``k`` ranges over the d-1 free parameters with descending pairing.
    """
    trials = check_positive_int(trials, "trials")
    diff = first_stage_bias(params, frame, N, mu, trials, master_seed)
    hits = np.max(np.abs(diff), axis=1) * math.sqrt(N) >= epsilon
    return int(hits.sum()) / trials
