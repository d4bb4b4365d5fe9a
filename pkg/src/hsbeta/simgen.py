"""Synthetic Beta-regression scenarios: Gaussian designs, sparse truths, Beta responses."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

from .errors import ParameterError

__all__ = ["SimScenario", "SimData", "gen_design", "gen_beta0", "gen_response", "generate", "ar_covariance",
           "RESPONSE_FLOOR"]

# Generated responses are clamped into [RESPONSE_FLOOR, 1 - RESPONSE_FLOOR].
# Beta draws with extreme means underflow far below this; the floor bounds
# the logit-transformed responses used by the Lasso comparator.
RESPONSE_FLOOR = 1e-6


@dataclass(frozen=True)
class SimScenario:
    n: int
    p: int
    s_star: int
    rho_x: float = 0.0
    phi_true: float = 10.0
    n_test: int = 30
    seed: int = 0

    def __post_init__(self):
        errors = []
        for name in ("n", "p", "n_test"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                errors.append(f"{name} must be a positive integer, got {v!r}")
        if int(self.s_star) != self.s_star or self.s_star < 0:
            errors.append(f"s_star must be a non-negative integer, got {self.s_star!r}")
        elif self.s_star > self.p:
            errors.append(f"s_star ({self.s_star}) exceeds p ({self.p})")
        if not 0 <= self.rho_x < 1:
            errors.append(f"rho_x must lie in [0, 1), got {self.rho_x!r}")
        if not self.phi_true > 0:
            errors.append(f"phi_true must be positive, got {self.phi_true!r}")
        if errors:
            raise ParameterError("; ".join(errors))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SimData:
    X: np.ndarray
    y: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    beta0: np.ndarray


def ar_covariance(p: int, rho: float) -> np.ndarray:
    """Sigma_ij = rho^|i - j|."""
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def gen_design(scenario: SimScenario, rng, n: int | None = None) -> np.ndarray:
    """Rows i.i.d. N(0, Sigma); identity when rho_x is 0, AR-type otherwise."""
    if not 0 <= scenario.rho_x < 1:
        raise ParameterError(f"rho_x must lie in [0, 1), got {scenario.rho_x!r}")
    rows = scenario.n if n is None else n
    Z = rng.standard_normal((rows, scenario.p))
    if scenario.rho_x == 0:
        return Z
    L = np.linalg.cholesky(ar_covariance(scenario.p, scenario.rho_x))
    return Z @ L.T


def gen_beta0(p: int, s_star: int) -> np.ndarray:
    """First ceil(s*/2) entries +1, next floor(s*/2) entries -1, the rest 0."""
    if s_star < 0 or s_star > p:
        raise ParameterError(f"s_star must lie in [0, p] = [0, {p}], got {s_star}")
    beta = np.zeros(p)
    pos = (s_star + 1) // 2
    beta[:pos] = 1.0
    beta[pos:s_star] = -1.0
    return beta


def gen_response(X, beta0, phi: float, rng, floor: float = RESPONSE_FLOOR) -> np.ndarray:
    """y_i ~ Beta(mu_i phi, (1 - mu_i) phi), mu_i = inv_logit(x_i'beta0), via a ratio of gammas.

    Draws are clamped into [floor, 1 - floor].
    """
    if not phi > 0:
        raise ParameterError(f"phi must be positive, got {phi!r}")
    if not 0 < floor < 0.5:
        raise ParameterError(f"floor must lie in (0, 0.5), got {floor!r}")
    eta = np.asarray(X, dtype=float) @ np.asarray(beta0, dtype=float)
    g1 = rng.standard_gamma(expit(eta) * phi)
    g2 = rng.standard_gamma(expit(-eta) * phi)
    with np.errstate(invalid="ignore"):
        y = g1 / (g1 + g2)
    # both gammas can underflow to zero for extreme means
    y = np.where(np.isnan(y), np.where(eta > 0, 1.0, 0.0), y)
    return np.clip(y, floor, 1.0 - floor)


def generate(scenario: SimScenario, replication: int = 0) -> SimData:
    """Training and test data for one replication.

    Train and test sets use disjoint child streams of
    SeedSequence([seed, replication]).
    """
    train_ss, test_ss = np.random.SeedSequence([int(scenario.seed), int(replication)]).spawn(2)
    beta0 = gen_beta0(scenario.p, scenario.s_star)
    train, test = np.random.default_rng(train_ss), np.random.default_rng(test_ss)
    X = gen_design(scenario, train)
    y = gen_response(X, beta0, scenario.phi_true, train)
    X_test = gen_design(scenario, test, n=scenario.n_test)
    y_test = gen_response(X_test, beta0, scenario.phi_true, test)
    return SimData(X=X, y=y, X_test=X_test, y_test=y_test, beta0=beta0)
