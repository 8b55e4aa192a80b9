"""Command line driver.

Usage::

    locc-spectrum <command> [--config FILE] [flags]

Commands: ``estimate``, ``bench-qcrb``, ``sweep-mu``, ``verify-lemma1``,
``verify-tails``, ``entangle``. Settings come from an optional YAML/JSON
config file whose keys match the long flag names (``n_grid`` for
``--n-grid``); flags override the file. Every output embeds the artifact
version and the fully resolved config, and contains nothing time-dependent,
so identical settings produce byte-identical files.

Exit status: 0 success, 1 invalid configuration, 2 a verification suite failed.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from . import __version__
from .bench import fsum_mean, mse_monte_carlo, mu_threshold_sweep, reports_to_csv, reports_to_json
from .entangle import BipartitePureState, entanglement_entropy, estimate_entanglement
from .errors import SpectrumEstimationError
from .estimator import adaptive_estimate
from .lemma_verify import (
    chernoff_grid_check,
    empirical_tail,
    lemma1_suite,
    spectral_structure,
    tail_probability_bound,
)
from .linalg import gell_mann_basis, unitary_from_generators
from .model import SpectrumParams, rho_from_spectrum
from .sampling import RngStream

log = logging.getLogger(__name__)

COMMANDS = ("estimate", "bench-qcrb", "sweep-mu", "verify-lemma1", "verify-tails", "entangle")

DEFAULTS = {
    "estimate": {"spectrum": [0.7], "n": 10_000, "mu": 0.6},
    "bench-qcrb": {"spectrum": [0.7], "n_grid": [1_000, 10_000, 100_000], "mu": 0.6, "trials": 2000},
    "sweep-mu": {"spectrum": [0.7], "n_grid": [1_000, 10_000, 100_000], "mu_list": [0.3, 0.6], "trials": 10_000},
    "verify-lemma1": {"trials": 10_000},
    "verify-tails": {"spectrum": [0.7], "n_grid": [1_000, 10_000], "mu": 0.6, "trials": 10_000,
                     "epsilon_list": [0.5, 1.0]},
    "entangle": {"spectrum": [0.5], "n": 100_000, "mu": 0.6, "trials": 500},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class _Parser(argparse.ArgumentParser):
    # unparseable flags are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class ExperimentConfig:
    command: str
    d: int = None
    spectrum: list = None
    frame: str = "identity"
    frame_seed: int = 0
    n: int = None
    n_grid: list = None
    mu: float = None
    mu_list: list = None
    epsilon_list: list = None
    trials: int = None
    seed: int = 42
    known_basis: bool = False
    out: str = None
    format: str = "csv"
    dims: list = field(default_factory=lambda: [2, 3, 4])

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        for name, value in DEFAULTS[self.command].items():
            if getattr(self, name) is None:
                setattr(self, name, value)
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be 'csv' or 'json', got {self.format!r}")
        if self.frame not in ("identity", "random"):
            raise ConfigError(f"frame: must be 'identity' or 'random', got {self.frame!r}")
        if self.seed is None or not _is_int(self.seed) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an explicit non-negative 64-bit integer, got {self.seed!r}")
        if self.spectrum is not None:
            try:
                params = SpectrumParams(tuple(self.spectrum))
            except SpectrumEstimationError as exc:
                raise ConfigError(f"spectrum: {exc} (Theta membership)") from None
            if self.d is not None and self.d != params.d:
                raise ConfigError(f"d: spectrum has {len(self.spectrum)} free entries so d must be {params.d}, got {self.d}")
            self.d = params.d
        self.seed = int(self.seed)
        for name in ("n", "trials", "d", "frame_seed"):
            v = getattr(self, name)
            if v is not None:
                minimum = 0 if name == "frame_seed" else 1
                if not _is_int(v) or v < minimum:
                    raise ConfigError(f"{name}: must be an integer >= {minimum}, got {v!r}")
                setattr(self, name, int(v))
        for name in ("n_grid", "mu_list", "epsilon_list", "dims"):
            v = getattr(self, name)
            if v is not None and len(v) == 0:
                raise ConfigError(f"{name}: must be non-empty")
        for name in ("n_grid", "dims"):
            v = getattr(self, name)
            if v is not None:
                if not all(_is_int(x) and x >= 1 for x in v):
                    raise ConfigError(f"{name}: entries must be positive integers, got {v!r}")
                setattr(self, name, [int(x) for x in v])
        if self.mu is not None and not 0 < self.mu < 1:
            raise ConfigError(f"mu: must lie in (0, 1), got {self.mu!r}")
        if self.mu_list is not None and not all(0 < m < 1 for m in self.mu_list):
            raise ConfigError(f"mu_list: entries must lie in (0, 1), got {self.mu_list!r}")
        return self

    def resolved(self):
        out = asdict(self)
        out.pop("out")
        return out


def _is_int(x):
    if isinstance(x, bool):
        return False
    return isinstance(x, (int, np.integer)) or (isinstance(x, float) and x.is_integer())


def _int_list(text):
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML or JSON config file; flags override it")
    common.add_argument("--d", type=int)
    common.add_argument("--spectrum", type=_float_list, help="free eigenvalues p_1,...,p_{d-1}")
    common.add_argument("--frame", choices=("identity", "random"))
    common.add_argument("--frame-seed", type=int)
    common.add_argument("--n", type=lambda s: int(float(s)))
    common.add_argument("--n-grid", type=_int_list)
    common.add_argument("--mu", type=float)
    common.add_argument("--mu-list", type=_float_list)
    common.add_argument("--epsilon-list", type=_float_list)
    common.add_argument("--trials", type=lambda s: int(float(s)))
    common.add_argument("--seed", type=int)
    common.add_argument("--known-basis", action="store_true", default=None)
    common.add_argument("--dims", type=_int_list)
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="locc-spectrum", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args):
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a mapping")
        data = {k.replace("-", "_"): v for k, v in data.items()}
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known or key == "command":
            raise ConfigError(f"{key}: unknown config field")
    for key, value in vars(args).items():
        if key in known and key != "command" and value is not None:
            data[key] = value
    return ExperimentConfig(command=args.command, **data).validate()


def _frame(cfg):
    if cfg.frame == "identity":
        return np.eye(cfg.d, dtype=np.complex128)
    basis = gell_mann_basis(cfg.d)
    eta = RngStream(cfg.frame_seed, 0).generator.normal(scale=3.0, size=len(basis))
    return unitary_from_generators(eta, basis)


def _num(x):
    return repr(float(x))


def _provenance(cfg):
    return {"artifact_version": __version__, "config": cfg.resolved()}


def _provenance_lines(cfg):
    return [f"artifact_version={__version__}", "config=" + json.dumps(cfg.resolved(), sort_keys=True)]


def _json_doc(cfg, results):
    return json.dumps({"provenance": _provenance(cfg), "results": results}, indent=2, sort_keys=True) + "\n"


def _csv_doc(cfg, header, rows):
    buf = io.StringIO()
    for line in _provenance_lines(cfg):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_estimate(cfg):
    params = SpectrumParams(tuple(cfg.spectrum))
    rho = rho_from_spectrum(params, _frame(cfg))
    est = adaptive_estimate(rho, cfg.n, cfg.mu, rng=RngStream(cfg.seed, 0))
    p_true = np.sort(params.full)[::-1]
    if cfg.format == "json":
        return _json_doc(cfg, {
            "p_hat": est.p_hat.tolist(), "p_true_sorted": p_true.tolist(),
            "counts": est.second_stage_counts.counts.tolist(),
            "split": dict(zip(("N_i", "N_f", "N_0", "mu"), est.split.as_tuple())),
            "N": est.n_copies, "ordering_ambiguous": est.ordering_ambiguous,
        }), 0
    rows = [[str(k), _num(est.p_hat[k]), _num(p_true[k]), str(int(est.second_stage_counts.counts[k]))]
            for k in range(params.d)]
    return _csv_doc(cfg, ["k", "p_hat", "p_true", "count"], rows), 0


def cmd_bench_qcrb(cfg):
    params = SpectrumParams(tuple(cfg.spectrum))
    frame = _frame(cfg)
    reports = []
    for N in cfg.n_grid:
        log.info("bench-qcrb N=%d", N)
        reports.append(mse_monte_carlo(params, frame, N, cfg.mu, cfg.trials, cfg.seed, cfg.known_basis))
    if cfg.format == "json":
        return reports_to_json(reports, _provenance(cfg)), 0
    return reports_to_csv(reports, _provenance_lines(cfg)), 0


def cmd_sweep_mu(cfg):
    params = SpectrumParams(tuple(cfg.spectrum))
    rows = mu_threshold_sweep(params, _frame(cfg), cfg.n_grid, cfg.mu_list, cfg.trials, cfg.seed)
    if cfg.format == "json":
        return _json_doc(cfg, rows), 0
    header = ["d", "N", "mu", "R", "seed", "k", "l", "value", "stderr"]
    out = [[str(params.d), str(r["N"]), _num(r["mu"]), str(cfg.trials), str(cfg.seed),
            str(r["k"]), str(r["l"]), _num(r["value"]), _num(r["stderr"])] for r in rows]
    return _csv_doc(cfg, header, out), 0


def cmd_verify_lemma1(cfg):
    dims = [cfg.d] if cfg.d is not None else cfg.dims
    report = lemma1_suite(cfg.trials, cfg.seed, dims=tuple(dims))
    status = 0 if report.total_violations == 0 else 2
    if cfg.format == "json":
        return _json_doc(cfg, report.to_dict()), status
    rows = [[str(p), str(report.violations[p]),
             "" if math.isinf(report.worst_margins[p]) else _num(report.worst_margins[p])]
            for p in sorted(report.violations)]
    return _csv_doc(cfg, ["point", "violations", "worst_margin"], rows), status


def cmd_verify_tails(cfg):
    results = []
    checked, exceptions = chernoff_grid_check()
    bad = {(n, p, lam) for n, p, lam, _, _ in exceptions}
    results.append({"check": "chernoff", "cases": checked, "exceptions": len(exceptions)})

    params = SpectrumParams(tuple(cfg.spectrum))
    frame = _frame(cfg)
    structure = spectral_structure(rho_from_spectrum(params, frame))
    tail_rows = []
    for eps in cfg.epsilon_list:
        for N in cfg.n_grid:
            freq = empirical_tail(params, frame, N, cfg.mu, eps, cfg.trials, cfg.seed)
            bound = tail_probability_bound(eps, N, cfg.mu, structure)
            se = math.sqrt(freq * (1 - freq) / cfg.trials)
            ok = freq <= bound + 3 * se
            tail_rows.append({"epsilon": eps, "N": N, "mu": cfg.mu, "empirical": freq,
                              "bound": bound, "stderr": se, "ok": ok})
    results.append({"check": "tail", "rows": tail_rows})
    status = 0 if not exceptions and all(r["ok"] for r in tail_rows) else 2
    if cfg.format == "json":
        return _json_doc(cfg, results), status
    header = ["check", "n", "p_or_epsilon", "lambda", "mu", "observed", "bound", "stderr", "ok"]
    rows = [["chernoff-summary", str(checked), "", "", "", str(len(exceptions)), "", "", str(not bad)]]
    for n, p, lam, exact, bound in exceptions:
        rows.append(["chernoff", str(n), _num(p), str(lam), "", _num(exact), _num(bound), "", "False"])
    for r in tail_rows:
        rows.append(["tail", str(r["N"]), _num(r["epsilon"]), "", _num(r["mu"]), _num(r["empirical"]),
                     _num(r["bound"]), _num(r["stderr"]), str(r["ok"])])
    return _csv_doc(cfg, header, rows), status


def cmd_entangle(cfg):
    params = SpectrumParams(tuple(cfg.spectrum))
    psi = BipartitePureState.from_schmidt(params.full, _frame(cfg))
    estimates = np.array([estimate_entanglement(psi, cfg.n, cfg.mu, RngStream(cfg.seed, t))
                          for t in range(cfg.trials)])
    mean, se = fsum_mean(estimates)
    sd = float(se * math.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
    result = {"true_entropy": entanglement_entropy(params.full), "estimate_mean": float(mean),
              "estimate_sd": sd, "N": cfg.n, "mu": cfg.mu, "trials": cfg.trials}
    if cfg.format == "json":
        return _json_doc(cfg, result), 0
    header = list(result)
    return _csv_doc(cfg, header, [[_num(v) if isinstance(v, float) else str(v) for v in result.values()]]), 0


HANDLERS = {
    "estimate": cmd_estimate,
    "bench-qcrb": cmd_bench_qcrb,
    "sweep-mu": cmd_sweep_mu,
    "verify-lemma1": cmd_verify_lemma1,
    "verify-tails": cmd_verify_tails,
    "entangle": cmd_entangle,
}


def run(cfg):
    """Execute a validated config; returns ``(text, exit_status)`` and writes ``cfg.out`` if set."""
    text, status = HANDLERS[cfg.command](cfg)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return text, status


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        text, status = run(cfg)
    except (ConfigError, SpectrumEstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not cfg.out:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
