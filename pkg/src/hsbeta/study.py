"""Simulation-study harness: generate, fit both methods, score, aggregate.

Every replication derives its randomness from ``(scenario.seed,
replication)`` alone, so results do not depend on execution order or on
how replications are spread over worker processes.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import fit_transformed_lasso, lasso_selected
from .errors import DomainError, NumericalError, ParameterError, StateError
from .gibbs import chain_rng, run_chain
from .io import write_json
from .metrics import METRIC_NAMES, evaluate
from .model import Dataset, FitConfig, summarize
from .simgen import SimScenario, generate

__all__ = [
    "METHODS",
    "StudyCase",
    "ReplicationResult",
    "BenchmarkResult",
    "expand_cases",
    "fold_rng",
    "run_replication",
    "run_benchmark",
    "aggregate",
    "write_rows",
    "timing_summary",
]

log = logging.getLogger(__name__)

METHODS = ("horseshoe", "lasso")
SCHEMA_VERSION = 1
_SCENARIO_KEYS = {"n", "p", "s_star", "rho_x", "phi_true", "n_test", "seed"}
_FIT_KEYS = {"phi", "alpha", "iterations", "burn_in"}


@dataclass(frozen=True)
class StudyCase:
    """One scenario together with the settings used to fit it.

    ``fit_phi`` defaults to the true precision of the scenario.
    """

    scenario: SimScenario
    name: str = ""
    fit_phi: float | None = None
    alpha: float = 0.99
    iterations: int = 1200
    burn_in: int = 200
    methods: tuple = METHODS

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ParameterError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        # validates phi/alpha/iterations together
        self.fit_config()

    @property
    def phi(self) -> float:
        return float(self.scenario.phi_true if self.fit_phi is None else self.fit_phi)

    def fit_config(self) -> FitConfig:
        return FitConfig(
            phi=self.phi, alpha=self.alpha, iterations=self.iterations,
            burn_in=self.burn_in, seed=self.scenario.seed,
        )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "scenario": self.scenario.as_dict(),
            "fit": {"phi": self.phi, "alpha": self.alpha,
                    "iterations": self.iterations, "burn_in": self.burn_in},
            "methods": list(self.methods),
        }


@dataclass
class ReplicationResult:
    case_index: int
    replication: int
    metrics: dict = field(default_factory=dict)   # method -> metric dict
    failures: dict = field(default_factory=dict)  # method -> error message
    seconds: dict = field(default_factory=dict)   # method -> wall time (never serialized)


@dataclass
class BenchmarkResult:
    cases: list
    replications: int
    rows: list

    def values(self, case_index: int, method: str, metric: str) -> np.ndarray:
        """Per-replication values of one metric, undefined entries dropped."""
        out = []
        for r in self.rows:
            if r.case_index == case_index and method in r.metrics:
                v = r.metrics[method].get(metric)
                if v is not None:
                    out.append(v)
        return np.asarray(out, dtype=float)

    def failure_count(self, case_index: int, method: str) -> int:
        return sum(1 for r in self.rows if r.case_index == case_index and method in r.failures)

    def report(self) -> dict:
        """The machine-readable aggregate; contains no timing, so it is reproducible."""
        cases = []
        for i, case in enumerate(self.cases):
            rows = [r for r in self.rows if r.case_index == i]
            entry = case.as_dict()
            entry["replications"] = self.replications
            entry["aggregate"] = {m: aggregate(rows, m) for m in case.methods}
            entry["failures"] = {m: self.failure_count(i, m) for m in case.methods}
            entry["failure_log"] = [
                {"replication": r.replication, "method": m, "error": msg}
                for r in rows for m, msg in sorted(r.failures.items())
            ]
            cases.append(entry)
        return {"schema_version": SCHEMA_VERSION, "version": __version__, "cases": cases}

    def write(self, path, rows_path=None) -> Path:
        """Write the aggregate JSON and, optionally, the per-replication CSV."""
        path = write_json(path, self.report())
        if rows_path is not None:
            write_rows(self.rows, rows_path, self.cases)
        return path


def _mean_sd(values):
    vals = [float(v) for v in values if v is not None]
    if not vals:
        return {"mean": None, "sd": None, "count": 0}
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else None
    return {"mean": float(np.mean(vals)), "sd": sd, "count": len(vals)}


def aggregate(rows, method: str) -> dict:
    """Mean, sample standard deviation and count of every metric for one method.

    Undefined metric values and failed replications are excluded; the
    standard deviation is ``None`` with fewer than two values.
    """
    rows = sorted(rows, key=lambda r: r.replication)
    got = [r.metrics[method] for r in rows if method in r.metrics]
    return {name: _mean_sd(m.get(name) for m in got) for name in METRIC_NAMES}


def fold_rng(seed: int, replication: int) -> np.random.Generator:
    """Stream for the cross-validation shuffle of one replication.

    A third child of the seed sequence whose first two children generate
    the training and test data.
    """
    ss = np.random.SeedSequence([int(seed), int(replication)], spawn_key=(2,))
    return np.random.default_rng(ss)


def run_replication(case: StudyCase, replication: int, case_index: int = 0) -> ReplicationResult:
    """Generate one data set, fit the requested methods and score them.

    Failures of one method are recorded and do not prevent the other.
    """
    data = generate(case.scenario, replication)
    result = ReplicationResult(case_index=case_index, replication=replication)
    for method in case.methods:
        start = time.perf_counter()
        try:
            if method == "horseshoe":
                cfg = case.fit_config()
                draws = run_chain(
                    Dataset(data.X, data.y), cfg, chain_rng(cfg.seed, 0, replication),
                )
                s = summarize(draws)
                beta_hat, selected = s.mean, s.selected
            else:
                fit = fit_transformed_lasso(
                    data.X, data.y, rng_for_folds=fold_rng(case.scenario.seed, replication),
                )
                beta_hat, selected = fit.coefficients, lasso_selected(fit)
            report = evaluate(beta_hat, selected, data.beta0, data.X, data.y, data.X_test, data.y_test)
            result.metrics[method] = {k: v for k, v in report.as_dict().items()}
        except (NumericalError, DomainError, ParameterError, StateError, np.linalg.LinAlgError) as exc:
            result.failures[method] = f"{type(exc).__name__}: {exc}"
            log.warning("case %d replication %d %s failed: %s", case_index, replication, method, exc)
        result.seconds[method] = time.perf_counter() - start
    return result


def _task(args):
    case, replication, case_index = args
    return run_replication(case, replication, case_index)


def run_benchmark(cases, replications: int, *, workers: int = 1, progress=None) -> BenchmarkResult:
    """Run ``replications`` replications of every case.

    Parameters
    ----------
    cases : sequence of StudyCase
    replications : int
        Replications per case, numbered 0..replications-1.
    workers : int
        Worker processes; 1 runs everything in this process.
    progress : callable, optional
        Called with each finished :class:`ReplicationResult`.
    """
    if int(replications) != replications or replications < 1:
        raise ParameterError(f"replications must be a positive integer, got {replications!r}")
    if int(workers) != workers or workers < 1:
        raise ParameterError(f"workers must be a positive integer, got {workers!r}")
    cases = list(cases)
    tasks = [(c, r, i) for i, c in enumerate(cases) for r in range(int(replications))]
    rows = []
    if workers == 1:
        for t in tasks:
            rows.append(_task(t))
            if progress:
                progress(rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            for res in pool.map(_task, tasks):
                rows.append(res)
                if progress:
                    progress(res)
    rows.sort(key=lambda r: (r.case_index, r.replication))
    return BenchmarkResult(cases=cases, replications=int(replications), rows=rows)


def write_rows(rows, path, cases=None) -> Path:
    """Per-replication metrics as CSV, one line per (case, replication, method)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "name", "replication", "method", "status", *METRIC_NAMES, "tp", "fp", "tn", "fn"])
        for r in rows:
            case = cases[r.case_index] if cases else None
            methods = case.methods if case else sorted(set(r.metrics) | set(r.failures))
            for m in methods:
                name = case.name if case else ""
                if m in r.metrics:
                    vals = [r.metrics[m].get(k) for k in (*METRIC_NAMES, "tp", "fp", "tn", "fn")]
                    cells = ["" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v)) for v in vals]
                    w.writerow([r.case_index, name, r.replication, m, "ok", *cells])
                else:
                    w.writerow([r.case_index, name, r.replication, m, "failed"] + [""] * (len(METRIC_NAMES) + 4))
    return path


def _scenario_from(entry: dict, where: str) -> SimScenario:
    missing = [k for k in ("n", "p", "s_star", "phi_true") if k not in entry]
    if missing:
        raise ParameterError(f"{where}: missing required field(s) {missing}")
    return SimScenario(**{k: entry[k] for k in _SCENARIO_KEYS if k in entry})


def expand_cases(scenario_set) -> list[StudyCase]:
    """Build study cases from a JSON-style description.

    ``scenario_set`` is a list of scenario objects, or a dict with a ``scenarios``
    list.  Each object holds the scenario fields, an optional ``name`` and
    ``methods`` list, and an optional ``fit`` object with ``phi``,
    ``alpha``, ``iterations`` and ``burn_in``.  A list-valued ``fit.phi``
    expands into one case per value (a misspecification sweep).
    """
    entries = scenario_set.get("scenarios") if isinstance(scenario_set, dict) else scenario_set
    if not isinstance(entries, list) or not entries:
        raise ParameterError("scenario set must be a non-empty list of scenario objects")
    cases = []
    for i, entry in enumerate(entries):
        where = f"scenario {i}"
        if not isinstance(entry, dict):
            raise ParameterError(f"{where}: expected an object, got {type(entry).__name__}")
        unknown = set(entry) - _SCENARIO_KEYS - {"name", "fit", "methods"}
        if unknown:
            raise ParameterError(f"{where}: unknown field(s) {sorted(unknown)}")
        scenario = _scenario_from(entry, where)
        fit = dict(entry.get("fit") or {})
        bad_fit = set(fit) - _FIT_KEYS
        if bad_fit:
            raise ParameterError(f"{where}: unknown fit field(s) {sorted(bad_fit)}")
        phis = fit.pop("phi", None)
        phis = phis if isinstance(phis, list) else [phis]
        methods = tuple(entry.get("methods", METHODS))
        for phi in phis:
            name = entry.get("name", f"scenario-{i}")
            if len(phis) > 1:
                name = f"{name}/phi={phi:g}"
            cases.append(StudyCase(scenario=scenario, name=name, fit_phi=phi, methods=methods, **fit))
    return cases


def timing_summary(result: BenchmarkResult) -> dict:
    """Mean wall seconds per replication and method (kept out of the report)."""
    out = {}
    for i, case in enumerate(result.cases):
        for m in case.methods:
            secs = [r.seconds[m] for r in result.rows if r.case_index == i and m in r.seconds]
            out[(case.name, m)] = math.fsum(secs) / len(secs) if secs else None
    return out
