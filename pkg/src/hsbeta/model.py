"""Data containers, the Beta log-likelihood and posterior summaries."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, gammaln, logit as _logit

from .errors import DomainError, ParameterError, StateError

__all__ = [
    "Y_EPS",
    "Dataset",
    "FitConfig",
    "ChainState",
    "PosteriorDraws",
    "PosteriorSummary",
    "inv_logit",
    "logit",
    "beta_log_likelihood",
    "summarize",
    "pool_draws",
    "estimate_phi_moments",
]

# Responses must satisfy Y_EPS <= y <= 1 - Y_EPS.
Y_EPS = 1e-12


def inv_logit(eta):
    """Logistic function 1 / (1 + exp(-eta)); saturates without overflow warnings."""
    out = expit(eta)
    return float(out) if np.ndim(out) == 0 else out


def logit(mu):
    out = _logit(mu)
    return float(out) if np.ndim(out) == 0 else out


def check_responses(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise DomainError("responses must be finite")
    bad = np.flatnonzero((y < Y_EPS) | (y > 1.0 - Y_EPS))
    if bad.size:
        shown = ", ".join(str(i) for i in bad[:10])
        more = "" if bad.size <= 10 else f" (+{bad.size - 10} more)"
        raise DomainError(
            f"responses must lie strictly inside (0, 1); offending rows: {shown}{more}",
        )
    return y


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``X`` (n x p) and responses ``y`` in (0, 1)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ParameterError(f"X must be a non-empty 2-D matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ParameterError("X contains non-finite entries")
        y = check_responses(self.y).copy()
        if y.size != X.shape[0]:
            raise ParameterError(f"X has {X.shape[0]} rows but y has {y.size} entries")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitConfig:
    """Settings of a Horseshoe Beta regression fit.

    The defaults are the run settings of the simulation study: 1200 sweeps,
    the first 200 discarded, tempering power 0.99.
    """

    phi: float
    alpha: float = 0.99
    iterations: int = 1200
    burn_in: int = 200
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        errors = []
        if not (np.isfinite(self.phi) and self.phi > 0):
            errors.append(f"phi must be positive, got {self.phi!r}")
        if not (0 < self.alpha <= 1):
            errors.append(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            errors.append(f"iterations must be a positive integer, got {self.iterations!r}")
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            errors.append(f"burn_in must be a non-negative integer, got {self.burn_in!r}")
        elif self.burn_in >= self.iterations:
            errors.append(
                f"burn_in ({self.burn_in}) must be smaller than iterations ({self.iterations})"
            )
        if int(self.chains) != self.chains or self.chains < 1:
            errors.append(f"chains must be a positive integer, got {self.chains!r}")
        if errors:
            raise ParameterError("; ".join(errors))

    @property
    def kept(self) -> int:
        return int(self.iterations - self.burn_in)

    def as_dict(self) -> dict:
        return {
            "phi": float(self.phi),
            "alpha": float(self.alpha),
            "iterations": int(self.iterations),
            "burn_in": int(self.burn_in),
            "seed": int(self.seed),
            "chains": int(self.chains),
        }


@dataclass
class ChainState:
    """Current values of every block of one Gibbs chain."""

    beta: np.ndarray
    lambda2: np.ndarray
    nu: np.ndarray
    tau2: float
    xi: float
    omega: np.ndarray

    @classmethod
    def initial(cls, n: int, p: int) -> "ChainState":
        # omega is overwritten by the first sweep before it is used
        return cls(
            beta=np.zeros(p),
            lambda2=np.ones(p),
            nu=np.ones(p),
            tau2=1.0,
            xi=1.0,
            omega=np.ones(n),
        )

    def copy(self) -> "ChainState":
        return ChainState(
            self.beta.copy(), self.lambda2.copy(), self.nu.copy(),
            float(self.tau2), float(self.xi), self.omega.copy(),
        )

    def is_positive(self) -> bool:
        return bool(
            np.all(self.lambda2 > 0) and np.all(self.nu > 0) and self.tau2 > 0
            and self.xi > 0 and np.all(self.omega > 0)
        )


@dataclass
class PosteriorDraws:
    """Post-burn-in draws of one chain (no thinning)."""

    beta_draws: np.ndarray
    tau2_draws: np.ndarray
    log_likelihood_trace: np.ndarray
    lambda2_draws: Optional[np.ndarray] = None

    def __post_init__(self):
        self.beta_draws = np.atleast_2d(np.asarray(self.beta_draws, dtype=float))
        rows = self.beta_draws.shape[0]
        if len(self.tau2_draws) != rows or len(self.log_likelihood_trace) != rows:
            raise ParameterError("all draw arrays must have one row per kept iteration")

    @property
    def n_kept(self) -> int:
        return self.beta_draws.shape[0]


@dataclass
class PosteriorSummary:
    mean: np.ndarray
    median: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    selected: np.ndarray
    credible_level: float = 0.95

    def as_dict(self) -> dict:
        return {
            "credible_level": self.credible_level,
            "mean": self.mean.tolist(),
            "median": self.median.tolist(),
            "ci_lower": self.ci_lower.tolist(),
            "ci_upper": self.ci_upper.tolist(),
            "selected": [bool(s) for s in self.selected],
        }


def beta_log_likelihood(dataset: Dataset, beta, phi: float) -> float:
    """Exact log-likelihood sum_i log Beta(y_i; mu_i phi, (1 - mu_i) phi), mu_i = inv_logit(x_i'beta)."""
    if not (np.isfinite(phi) and phi > 0):
        raise ParameterError(f"phi must be positive, got {phi!r}")
    eta = dataset.X @ np.asarray(beta, dtype=float)
    a = expit(eta) * phi
    b = expit(-eta) * phi
    y = dataset.y
    return float(np.sum(
        gammaln(phi) - gammaln(a) - gammaln(b)
        + (a - 1.0) * np.log(y) + (b - 1.0) * np.log1p(-y)
    ))


def pool_draws(draws: list[PosteriorDraws]) -> PosteriorDraws:
    """Stack several chains' draws into one set."""
    if not draws:
        raise StateError("no chains to pool")
    lam = None
    if all(d.lambda2_draws is not None for d in draws):
        lam = np.vstack([d.lambda2_draws for d in draws])
    return PosteriorDraws(
        beta_draws=np.vstack([d.beta_draws for d in draws]),
        tau2_draws=np.concatenate([d.tau2_draws for d in draws]),
        log_likelihood_trace=np.concatenate([d.log_likelihood_trace for d in draws]),
        lambda2_draws=lam,
    )


def summarize(draws: PosteriorDraws, credible_level: float = 0.95) -> PosteriorSummary:
    """Column-wise mean, median and equal-tailed credible interval of the beta draws.

    A coefficient is selected when its interval excludes zero.
    """
    if not 0 < credible_level < 1:
        raise ParameterError(f"credible_level must lie in (0, 1), got {credible_level!r}")
    B = draws.beta_draws
    if B.size == 0 or B.shape[0] == 0:
        raise StateError("cannot summarize an empty set of draws")
    tail = 0.5 * (1.0 - credible_level)
    lo, med, hi = np.quantile(B, [tail, 0.5, 1.0 - tail], axis=0)
    # quantile interpolation can put the median a rounding error outside the bounds
    med = np.clip(med, lo, hi)
    return PosteriorSummary(
        mean=B.mean(axis=0),
        median=med,
        ci_lower=lo,
        ci_upper=hi,
        selected=(lo > 0) | (hi < 0),
        credible_level=float(credible_level),
    )


def estimate_phi_moments(y) -> float:
    """Method-of-moments precision from the responses alone: ybar(1 - ybar)/s^2 - 1.

    Treats the responses as draws from a single Beta distribution, so it
    underestimates phi when the means vary strongly with the covariates.
    """
    y = check_responses(y)
    if y.size < 2:
        raise ParameterError("need at least two responses to estimate phi")
    m = y.mean()
    v = y.var(ddof=1)
    if v <= 0:
        raise ParameterError("responses have zero variance; phi is not identifiable")
    est = m * (1.0 - m) / v - 1.0
    if est <= 0:
        raise ParameterError(
            f"moment estimate of phi is not positive ({est:.4g}); supply phi explicitly"
        )
    return float(est)
