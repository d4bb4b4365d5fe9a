"""Command-line interface: ``hsbeta simulate | fit | benchmark | diagnose``.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
failure of the sampler, 4 file-system errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import ess, export_acf, export_traces
from .errors import DomainError, NumericalError, ParameterError, StateError
from .gibbs import chain_rng, run_chain
from .io import read_json, read_matrix, read_vector, write_json, write_matrix, write_vector
from .model import Dataset, FitConfig, PosteriorDraws, estimate_phi_moments, pool_draws, summarize
from .simgen import SimScenario, generate
from .study import expand_cases, run_benchmark, timing_summary

log = logging.getLogger("hsbeta")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
SCHEMA_VERSION = 1
_SCENARIO_FIELDS = ("n", "p", "s_star", "rho_x", "phi_true", "n_test", "seed")
_REQUIRED_SCENARIO = ("n", "p", "s_star", "phi_true")
_FIT_FIELDS = ("phi", "alpha", "iterations", "burn_in", "seed", "chains")


def _load_object(path, what):
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise ParameterError(f"{what} {path} must contain a JSON object")
    return obj


# --------------------------------------------------------------------- simulate

def scenario_from_dict(obj: dict) -> SimScenario:
    missing = [k for k in _REQUIRED_SCENARIO if k not in obj]
    unknown = sorted(set(obj) - set(_SCENARIO_FIELDS) - {"name"})
    problems = []
    if missing:
        problems.append(f"missing field(s): {', '.join(missing)}")
    if unknown:
        problems.append(f"unknown field(s): {', '.join(unknown)}")
    if problems:
        raise ParameterError("invalid scenario: " + "; ".join(problems))
    return SimScenario(**{k: obj[k] for k in _SCENARIO_FIELDS if k in obj})


def cmd_simulate(args) -> int:
    obj = _load_object(args.config, "scenario file")
    if args.seed is not None:
        obj["seed"] = args.seed
    scenario = scenario_from_dict(obj)
    data = generate(scenario, args.replication)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "X.csv", data.X)
    write_vector(out / "y.csv", data.y, "y")
    write_matrix(out / "X_test.csv", data.X_test)
    write_vector(out / "y_test.csv", data.y_test, "y")
    write_vector(out / "beta0.csv", data.beta0, "beta0")
    write_json(out / "scenario.json", {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "scenario": scenario.as_dict(),
        "replication": args.replication,
    })
    log.info("wrote scenario files to %s", out)
    return EXIT_OK


# -------------------------------------------------------------------------- fit

def _fit_settings(args) -> tuple[dict, str]:
    settings = _load_object(args.config, "fit config") if args.config else {}
    unknown = sorted(set(settings) - set(_FIT_FIELDS) - {"intercept"})
    if unknown:
        raise ParameterError(f"invalid fit config: unknown field(s): {', '.join(unknown)}")
    for name in _FIT_FIELDS:
        v = getattr(args, name)
        if v is not None:
            settings[name] = v
    source = "given"
    if args.estimate_phi:
        source = "moments"
    elif settings.get("phi") is None:
        raise ParameterError(
            "phi is required: supply it with --phi (or in the fit config), "
            "or pass --estimate-phi to use a method-of-moments estimate from y"
        )
    return settings, source


def load_dataset(data_dir, intercept: bool = False) -> Dataset:
    d = Path(data_dir)
    X = read_matrix(d / "X.csv")
    y = read_vector(d / "y.csv")
    if intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    return Dataset(X, y)


def _write_draws(path, chains: list[PosteriorDraws], names):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "iteration", "tau2", "log_likelihood", *names])
        for c, dr in enumerate(chains):
            for it in range(dr.n_kept):
                w.writerow([c, it, f"{dr.tau2_draws[it]:.17g}", f"{dr.log_likelihood_trace[it]:.17g}",
                            *(f"{v:.17g}" for v in dr.beta_draws[it])])


def read_draws(path) -> list[PosteriorDraws]:
    """Read a draws CSV written by ``fit --keep-draws`` back into per-chain draws."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    if header[:4] != ["chain", "iteration", "tau2", "log_likelihood"]:
        raise ParameterError(f"{path} is not a draws file")
    arr = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(len(rows), len(header))
    out = []
    for c in np.unique(arr[:, 0]).astype(int):
        block = arr[arr[:, 0] == c]
        out.append(PosteriorDraws(beta_draws=block[:, 4:], tau2_draws=block[:, 2],
                                  log_likelihood_trace=block[:, 3]))
    return out


def cmd_fit(args) -> int:
    settings, phi_source = _fit_settings(args)
    intercept = bool(args.intercept or settings.pop("intercept", False))
    dataset = load_dataset(args.data_dir, intercept)
    if phi_source == "moments":
        settings["phi"] = estimate_phi_moments(dataset.y)
        log.info("method-of-moments phi = %.6g", settings["phi"])
    config = FitConfig(**settings)
    names = (["intercept"] if intercept else []) + [f"x{j + 1}" for j in range(dataset.p - intercept)]

    chains, seconds = [], []
    for c in range(config.chains):
        start = time.perf_counter()
        chains.append(run_chain(dataset, config, chain_rng(config.seed, c), chain=c))
        seconds.append(time.perf_counter() - start)
    summary = summarize(pool_draws(chains), args.credible_level)

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    draws_file = None
    if args.keep_draws:
        draws_path = out.with_name(out.stem + "_draws.csv")
        _write_draws(draws_path, chains, names)
        draws_file = draws_path.name
    result = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": {
            **config.as_dict(),
            "phi_source": phi_source,
            "intercept": intercept,
            "data_dir": str(args.data_dir),
            "n": dataset.n,
            "p": dataset.p,
        },
        "summary": {"names": names, **summary.as_dict()},
        "diagnostics": {
            "kept_per_chain": config.kept,
            "ess": [[_safe_ess(dr.beta_draws[:, j]) for j in range(dataset.p)] for dr in chains],
        },
        "timing": {"seconds_per_chain": seconds, "seconds_total": float(sum(seconds))},
        "draws_file": draws_file,
    }
    write_json(out, result)
    log.info("wrote results to %s", out)
    return EXIT_OK


def _safe_ess(x):
    try:
        return ess(x)
    except StateError:
        return None


# -------------------------------------------------------------------- benchmark

def cmd_benchmark(args) -> int:
    scenario_set = read_json(args.config)
    if args.seed is not None:
        entries = scenario_set.get("scenarios") if isinstance(scenario_set, dict) else scenario_set
        for e in entries or []:
            if isinstance(e, dict):
                e["seed"] = args.seed
    cases = expand_cases(scenario_set)

    def progress(r):
        log.info("case %d replication %d done", r.case_index, r.replication)

    result = run_benchmark(cases, args.replications, workers=args.threads, progress=progress)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows_path = Path(args.rows) if args.rows else out.with_name(out.stem + "_rows.csv")
    result.write(out, rows_path)
    for (name, method), secs in timing_summary(result).items():
        log.info("%s %s: %.3g s per replication", name, method, secs or float("nan"))
    return EXIT_OK


# --------------------------------------------------------------------- diagnose

def default_coordinates(beta0, per_group: int = 3, seed: int = 0) -> list[int]:
    """Up to ``per_group`` random coordinates for each distinct true value, sorted by value."""
    rng = np.random.default_rng(seed)
    beta0 = np.asarray(beta0, dtype=float)
    picks = []
    for value in sorted(np.unique(beta0), reverse=True):
        idx = np.flatnonzero(beta0 == value)
        k = min(per_group, idx.size)
        picks.extend(int(i) for i in np.sort(rng.choice(idx, size=k, replace=False)))
    return picks


def cmd_diagnose(args) -> int:
    results_path = Path(args.results)
    results = _load_object(results_path, "results file")
    draws_name = results.get("draws_file")
    if not draws_name:
        raise ParameterError(
            f"{results_path} has no retained draws; rerun fit with --keep-draws"
        )
    draws_path = results_path.parent / draws_name
    if not draws_path.exists():
        raise FileNotFoundError(f"draws file {draws_path} is missing; rerun fit with --keep-draws")
    chains = read_draws(draws_path)
    offset = 1 if results.get("config", {}).get("intercept") else 0
    p = chains[0].beta_draws.shape[1]

    if args.coordinates:
        coords = [int(c) + offset for c in args.coordinates.split(",")]
    else:
        beta0_path = Path(args.data_dir) / "beta0.csv" if args.data_dir else None
        if beta0_path is not None and beta0_path.exists():
            coords = [c + offset for c in default_coordinates(read_vector(beta0_path), 3, args.seed)]
        else:
            coords = list(range(offset, min(p, offset + 3)))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for c, dr in enumerate(chains):
        export_traces(dr, coords, out / f"traces_chain{c}.csv")
        export_acf(dr, coords, out / f"acf_chain{c}.csv", max_lag=args.max_lag)
    log.info("exported %d coordinates for %d chain(s) to %s", len(coords), len(chains), out)
    return EXIT_OK


# ------------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsbeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate one synthetic data set")
    s.add_argument("--config", required=True, help="scenario JSON")
    s.add_argument("--output-dir", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--replication", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="Horseshoe Beta regression on X.csv / y.csv")
    f.add_argument("--data-dir", required=True)
    f.add_argument("--output", required=True, help="results JSON path")
    f.add_argument("--config", help="fit config JSON (flags override it)")
    f.add_argument("--phi", type=float)
    f.add_argument("--alpha", type=float)
    f.add_argument("--iterations", type=int)
    f.add_argument("--burn-in", dest="burn_in", type=int)
    f.add_argument("--chains", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--keep-draws", action="store_true", help="also write the retained draws")
    f.add_argument("--estimate-phi", action="store_true", help="method-of-moments phi from y")
    f.add_argument("--intercept", action="store_true", help="prepend a column of ones to X")
    f.add_argument("--credible-level", type=float, default=0.95)
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("benchmark", help="replicated simulation study")
    b.add_argument("--config", required=True, help="scenario-set JSON")
    b.add_argument("--replications", type=int, required=True)
    b.add_argument("--output", required=True, help="aggregate JSON path")
    b.add_argument("--rows", help="per-replication CSV path (default next to the output)")
    b.add_argument("--threads", type=int, default=1, help="worker processes")
    b.add_argument("--seed", type=int, help="override every scenario seed")
    b.set_defaults(func=cmd_benchmark)

    d = sub.add_parser("diagnose", help="trace and autocorrelation export")
    d.add_argument("--results", required=True)
    d.add_argument("--data-dir")
    d.add_argument("--output-dir", required=True)
    d.add_argument("--coordinates", help="comma-separated 0-based coefficient indices")
    d.add_argument("--max-lag", type=int, default=40)
    d.add_argument("--seed", type=int, default=0, help="seed for the default coordinate choice")
    d.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except NumericalError as exc:
        where = f" (iteration {exc.iteration})" if exc.iteration is not None else ""
        print(f"error: numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, DomainError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
