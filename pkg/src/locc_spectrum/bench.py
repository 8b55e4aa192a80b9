"""Monte Carlo MSE benchmarks against the quantum Cramer-Rao bound.

Trial ``t`` of every experiment draws from ``RngStream(master_seed, t)`` and
per-trial results are combined with exactly rounded sums (``math.fsum``), so
reports do not depend on the order in which trials finish.

Errors are measured against the true spectrum sorted descending, matching the
frame-order convention of :mod:`locc_spectrum.estimator`.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimator import adaptive_estimate, second_stage, split_copies, plain_tomography
from .linalg import gell_mann_basis
from .model import SpectrumParams, qfi_inverse, rho_from_spectrum
from .sampling import RngStream, projective_probs
from .validation import check_positive_int

CSV_COLUMNS = ("d", "N", "mu", "R", "seed", "k", "l", "mse", "scaled_mse", "target", "gap", "stderr")


def fsum_mean(samples):
    """Exactly rounded mean and standard error of the mean over axis 0.

    ``samples`` has shape ``(R, ...)``; returns two arrays of the trailing shape.
    """
    samples = np.asarray(samples, dtype=float)
    R = samples.shape[0]
    flat = samples.reshape(R, -1)
    mean = np.array([math.fsum(col) / R for col in flat.T])
    if R > 1:
        var = np.array([math.fsum((col - m) ** 2) / (R - 1) for col, m in zip(flat.T, mean)])
        se = np.sqrt(var / R)
    else:
        se = np.full(mean.shape, np.nan)
    shape = samples.shape[1:]
    return mean.reshape(shape), se.reshape(shape)


def _float(x):
    # repr gives the shortest round-trip decimal for a Python float
    return repr(float(x))


@dataclass(frozen=True)
class ConditionalMse:
    q: np.ndarray
    n_final: int
    matrix: np.ndarray
    variance: np.ndarray
    bias_square: np.ndarray


def conditional_mse_closed_form(q, params, n_final):
    """MSE of ``p_hat = N_k / N_f`` given second-stage probabilities ``q``.

    ``(q_k delta_kl - q_k q_l) / N_f + (p_k - q_k)(p_l - q_l)`` over the free
    indices; the second term is the squared bias.
    """
    n_final = check_positive_int(n_final, "n_final")
    q = np.asarray(q, dtype=float)[: params.d - 1]
    p = np.asarray(params.p)
    variance = (np.diag(q) - np.outer(q, q)) / n_final
    bias = p - q
    bias_square = np.outer(bias, bias)
    return ConditionalMse(q=q, n_final=n_final, matrix=variance + bias_square,
                          variance=variance, bias_square=bias_square)


@dataclass
class MseReport:
    """Monte Carlo MSE of the free spectrum parameters.

    ``standard_errors`` are the Monte Carlo standard errors of ``mse``; the
    scaled versions (multiplied by ``N``) are in ``scaled_standard_errors``.
    ``expected_conditional_mse`` averages the closed-form conditional MSE over
    the sampled first stages.
    """

    d: int
    N: int
    mu: float
    trials: int
    master_seed: int
    p_true: list
    known_basis: bool
    mse: np.ndarray
    bias: np.ndarray
    standard_errors: np.ndarray
    qcrb_target: np.ndarray
    expected_conditional_mse: np.ndarray
    ambiguous_fraction: float
    mean_n_final: float
    pairing: str = field(default="descending")

    @property
    def scaled_mse(self):
        return self.N * self.mse

    @property
    def scaled_standard_errors(self):
        return self.N * self.standard_errors

    @property
    def gap(self):
        return self.scaled_mse - self.qcrb_target

    def to_dict(self):
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        out["scaled_mse"] = self.scaled_mse.tolist()
        out["scaled_standard_errors"] = self.scaled_standard_errors.tolist()
        out["gap"] = self.gap.tolist()
        return out

    def csv_rows(self):
        """Rows matching :data:`CSV_COLUMNS`; ``stderr`` is the SE of ``scaled_mse``."""
        rows = []
        m = self.d - 1
        scaled, gap, sse = self.scaled_mse, self.gap, self.scaled_standard_errors
        for k in range(m):
            for l in range(m):
                rows.append([
                    str(self.d), str(self.N), _float(self.mu), str(self.trials), str(self.master_seed),
                    str(k), str(l), _float(self.mse[k, l]), _float(scaled[k, l]),
                    _float(self.qcrb_target[k, l]), _float(gap[k, l]), _float(sse[k, l]),
                ])
        return rows


def _true_sorted(params):
    return np.sort(params.full)[::-1]


def mse_monte_carlo(params, frame, N, mu, trials=2000, master_seed=0, known_basis=False):
    """Estimate the MSE matrix of the adaptive strategy by ``trials`` independent runs.

    With ``known_basis=True`` stage one is skipped and all ``N`` copies are
    measured in the true eigenbasis (``mu`` is ignored), giving the baseline
    that saturates the bound exactly.
    """
    trials = check_positive_int(trials, "trials", minimum=2)
    d = params.d
    rho = rho_from_spectrum(params, frame)
    V = np.eye(d, dtype=np.complex128) if frame is None else np.asarray(frame, dtype=np.complex128)
    # align the true frame with the descending convention
    order = np.argsort(-params.full, kind="stable")
    p_sorted = _true_sorted(params)
    p_sorted_params = SpectrumParams.from_full(p_sorted)
    basis = gell_mann_basis(d)
    m = d - 1

    errors = np.empty((trials, m))
    cond = np.empty((trials, m, m))
    ambiguous = 0
    n_final_total = 0
    for t in range(trials):
        stream = RngStream(master_seed, t)
        if known_basis:
            n_final = int(N)
            _, p_hat = second_stage(rho, V[:, order], n_final, stream)
            q = p_sorted
        else:
            est = adaptive_estimate(rho, N, mu, basis, stream)
            n_final = est.split.n_final
            p_hat = est.p_hat
            q = projective_probs(rho, est.frame)
            ambiguous += est.ordering_ambiguous
        n_final_total += n_final
        errors[t] = p_hat[:m] - p_sorted[:m]
        cond[t] = conditional_mse_closed_form(q, p_sorted_params, n_final).matrix

    outer = errors[:, :, None] * errors[:, None, :]
    mse, se = fsum_mean(outer)
    bias, _ = fsum_mean(errors)
    expected, _ = fsum_mean(cond)
    return MseReport(
        d=d, N=int(N), mu=float(mu), trials=trials, master_seed=int(master_seed),
        p_true=p_sorted.tolist(), known_basis=bool(known_basis),
        mse=mse, bias=bias, standard_errors=se,
        qcrb_target=qfi_inverse(p_sorted_params),
        expected_conditional_mse=expected,
        ambiguous_fraction=ambiguous / trials,
        mean_n_final=n_final_total / trials,
    )


def first_stage_bias(params, frame, N, mu, trials, master_seed=0):
    """Per-trial ``q - p`` over the free indices after plain tomography only.

    Returns an array of shape ``(trials, d-1)``; ``q`` is computed exactly
    from the estimated frame, so no second stage is simulated.
    """
    d = params.d
    rho = rho_from_spectrum(params, frame)
    split = split_copies(N, mu, d)
    basis = gell_mann_basis(d)
    p_sorted = _true_sorted(params)
    out = np.empty((trials, d - 1))
    for t in range(trials):
        tomo = plain_tomography(rho, split.n_per_generator, basis, RngStream(master_seed, t))
        q = projective_probs(rho, tomo.eigensystem.eigenvectors)
        out[t] = q[: d - 1] - p_sorted[: d - 1]
    return out


def mu_threshold_sweep(params, frame, n_grid, mu_list, trials=10_000, seed=0):
    """Monte Carlo estimate of ``E[N (q_k - p_k)(q_l - p_l)]`` for each ``(N, mu)``.

    Returns a list of dict rows with keys ``N, mu, k, l, value, stderr``.
    """
    trials = check_positive_int(trials, "trials", minimum=2)
    rows = []
    m = params.d - 1
    for mu in mu_list:
        for N in n_grid:
            diff = first_stage_bias(params, frame, N, mu, trials, seed)
            mean, se = fsum_mean(N * diff[:, :, None] * diff[:, None, :])
            for k in range(m):
                for l in range(m):
                    rows.append({"N": int(N), "mu": float(mu), "k": k, "l": l,
                                 "value": float(mean[k, l]), "stderr": float(se[k, l])})
    return rows


def is_monotone(values, direction):
    """True if ``values`` is strictly decreasing (``"decreasing"``) or increasing."""
    diffs = np.diff(np.asarray(values, dtype=float))
    if direction == "decreasing":
        return bool(np.all(diffs < 0))
    if direction == "increasing":
        return bool(np.all(diffs > 0))
    raise ValueError(f"unknown direction {direction!r}")


def majority_monotone(series_by_seed, direction):
    """True if more than half of the per-seed series are monotone in ``direction``."""
    hits = sum(is_monotone(s, direction) for s in series_by_seed)
    return hits * 2 > len(series_by_seed)


def reports_to_json(reports, provenance=None):
    payload = {"provenance": provenance or {}, "reports": [r.to_dict() for r in reports]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def reports_to_csv(reports, provenance_lines=()):
    buf = io.StringIO()
    for line in provenance_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerows(r.csv_rows())
    return buf.getvalue()
