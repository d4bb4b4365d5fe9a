"""Chain diagnostics: autocorrelation, effective sample size and trace export.

Autocovariances use the biased 1/N convention.  The effective sample size
sums autocorrelations up to (not including) the first negative lag.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ParameterError, StateError
from .model import PosteriorDraws

__all__ = [
    "DegenerateSeriesError",
    "acf",
    "ess",
    "export_traces",
    "read_traces",
    "export_acf",
]

_TRACE_HEADER = ("iteration", "coordinate", "value")


class DegenerateSeriesError(StateError):
    """A series with zero variance has no defined autocorrelation."""


def _series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).reshape(-1)
    if x.size < 2:
        raise ParameterError("series needs at least two values")
    if not np.all(np.isfinite(x)):
        raise ParameterError("series contains non-finite values")
    return x


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 0..max_lag.

    Parameters
    ----------
    series : array_like
        One-dimensional chain of length N > max_lag.
    max_lag : int
        Largest lag to report.

    Returns
    -------
    numpy.ndarray
        Length ``max_lag + 1``; element 0 is exactly 1.
    """
    x = _series(series)
    if int(max_lag) != max_lag or max_lag < 0:
        raise ParameterError(f"max_lag must be a non-negative integer, got {max_lag!r}")
    max_lag = int(max_lag)
    if x.size <= max_lag:
        raise ParameterError(f"series of length {x.size} is too short for max_lag={max_lag}")
    d = x - x.mean()
    c0 = float(d @ d)
    if c0 <= 1e-300 or np.ptp(x) == 0:
        raise DegenerateSeriesError("series is constant; autocorrelation is undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(d[:-k] @ d[k:]) / c0
    return out


def ess(series, max_lag: int | None = None) -> float:
    """Effective sample size N / (1 + 2 * sum_k rho_k).

    The sum runs over lags 1, 2, ... and stops before the first negative
    autocorrelation, or at ``max_lag`` (default N - 1).
    """
    x = _series(series)
    n = x.size
    lag_cap = n - 1 if max_lag is None else min(int(max_lag), n - 1)
    acf(x, 0)  # raises on a constant series
    d = x - x.mean()
    c0 = float(d @ d)
    total = 0.0
    for k in range(1, lag_cap + 1):
        rho = float(d[:-k] @ d[k:]) / c0
        if rho < 0:
            break
        total += rho
    return n / (1.0 + 2.0 * total)


def _check_coordinates(draws: PosteriorDraws, coordinates) -> list[int]:
    p = draws.beta_draws.shape[1]
    coords = [int(c) for c in coordinates]
    bad = [c for c in coords if not 0 <= c < p]
    if bad:
        raise ParameterError(f"coordinates out of range [0, {p}): {bad}")
    return coords


def export_traces(draws: PosteriorDraws, coordinates, path) -> Path:
    """Write retained beta draws as tidy CSV rows ``iteration,coordinate,value``.

    Iterations count kept draws from 0; values use 17 significant digits so
    that reading the file back recovers them exactly.
    """
    coords = _check_coordinates(draws, coordinates)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_TRACE_HEADER)
            for c in coords:
                for it, v in enumerate(draws.beta_draws[:, c]):
                    w.writerow((it, c, f"{v:.17g}"))
    except OSError as exc:
        raise OSError(f"could not write traces to {path}: {exc}") from exc
    return path


def read_traces(path) -> dict[int, np.ndarray]:
    """Read a trace CSV back into ``{coordinate: values in iteration order}``."""
    path = Path(path)
    rows: dict[int, list[tuple[int, float]]] = {}
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if tuple(header or ()) != _TRACE_HEADER:
                raise ParameterError(f"{path} is not a trace file (header {header!r})")
            for it, c, v in reader:
                rows.setdefault(int(c), []).append((int(it), float(v)))
    except OSError as exc:
        raise OSError(f"could not read traces from {path}: {exc}") from exc
    return {c: np.array([v for _, v in sorted(r)]) for c, r in rows.items()}


def export_acf(draws: PosteriorDraws, coordinates, path, max_lag: int = 40) -> Path:
    """Write ``lag,coordinate,acf`` rows for each requested coordinate."""
    coords = _check_coordinates(draws, coordinates)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("lag", "coordinate", "acf"))
            for c in coords:
                for k, r in enumerate(acf(draws.beta_draws[:, c], max_lag)):
                    w.writerow((k, c, f"{r:.17g}"))
    except OSError as exc:
        raise OSError(f"could not write autocorrelations to {path}: {exc}") from exc
    return path
