"""Polya-Gamma / Horseshoe Gibbs sampler for tempered Beta regression.

Each sweep updates, in order, the latent PG variables omega, the
coefficients beta, the local variances lambda^2 and their auxiliaries nu,
the global variance tau^2 and its auxiliary xi.  The likelihood enters
through its logistic-form surrogate exp(kappa * eta) / (1 + e^eta)^b with
b = alpha * phi and kappa_i = alpha * phi * (y_i - 1/2), so the tempering
power alpha scales both the PG shape and the pseudo-responses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError, ParameterError, StateError
from .model import ChainState, Dataset, FitConfig, PosteriorDraws, beta_log_likelihood
from .pg import sample_pg_vector

__all__ = [
    "FullConditionalNormal",
    "sample_inverse_gamma",
    "step_omega",
    "build_full_conditional",
    "step_beta",
    "step_lambda2",
    "step_nu",
    "step_tau2",
    "step_xi",
    "gibbs_sweep",
    "run_chain",
    "run_chains",
    "chain_rng",
    "VARIANCE_BOUNDS",
]

# lambda^2 and tau^2 draws are clamped into this range
VARIANCE_BOUNDS = (1e-12, 1e12)
_JITTER_START = 1e-10
_JITTER_STOP = 1e-6


@dataclass
class FullConditionalNormal:
    """N(mean, V) with V = covariance_factor @ covariance_factor.T."""

    mean: np.ndarray
    covariance_factor: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        return self.covariance_factor @ self.covariance_factor.T


def chain_rng(seed: int, chain: int = 0, replication: int = 0) -> np.random.Generator:
    """Independent stream for one (seed, replication, chain) triple."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replication), int(chain)]))


def sample_inverse_gamma(shape, scale, rng: np.random.Generator, size=None):
    """Inverse-gamma draws with density proportional to x^(-shape-1) exp(-scale/x).

    Sampled as the reciprocal of a Gamma(shape, rate=scale) draw.  ``shape``
    and ``scale`` broadcast against each other.
    """
    shape_a = np.asarray(shape, dtype=float)
    scale_a = np.asarray(scale, dtype=float)
    if np.any(~np.isfinite(shape_a)) or np.any(shape_a <= 0):
        raise ParameterError("inverse-gamma shape must be finite and positive")
    if np.any(~np.isfinite(scale_a)) or np.any(scale_a <= 0):
        raise ParameterError("inverse-gamma scale must be finite and positive")
    if size is None:
        size = np.broadcast(shape_a, scale_a).shape
    draw = _ig(shape_a, scale_a, rng, size)
    return float(draw) if np.ndim(draw) == 0 else draw


def _ig(shape, scale, rng, size=None):
    return scale / rng.standard_gamma(shape, size=size)


def _clamp(v):
    lo, hi = VARIANCE_BOUNDS
    if np.ndim(v) == 0:
        return float(min(max(v, lo), hi))
    return np.clip(v, lo, hi)


# unchecked conditional draws shared by the public step functions and the sweep

def _lambda2(beta, tau2, nu, rng):
    return _clamp(_ig(1.0, 1.0 / nu + beta * beta / (2.0 * tau2), rng, beta.shape))


def _nu(lambda2, rng):
    return _ig(1.0, 1.0 + 1.0 / lambda2, rng, lambda2.shape)


def _tau2(beta, lambda2, xi, rng):
    scale = 1.0 / xi + 0.5 * float(np.sum(beta * beta / lambda2))
    return _clamp(float(_ig(0.5 * (beta.size + 1), scale, rng)))


def _xi(tau2, rng):
    return float(_ig(1.0, 1.0 + 1.0 / tau2, rng))


def _omega(X, beta, b, rng):
    return sample_pg_vector(b, X @ beta, rng)


def step_omega(state: ChainState, dataset: Dataset, config: FitConfig, rng) -> np.ndarray:
    """omega_i ~ PG(alpha * phi, x_i'beta), independently over observations."""
    if not np.all(np.isfinite(state.beta)):
        raise StateError("beta contains non-finite values")
    return _omega(dataset.X, state.beta, config.alpha * config.phi, rng)


def _reverse_cholesky(P):
    # P = U U' with U upper triangular, so inv(U).T is a lower-triangular factor of inv(P)
    C = linalg.cholesky(P[::-1, ::-1], lower=True, check_finite=False)
    return C[::-1, ::-1]


def _factor_precision(P):
    try:
        return _reverse_cholesky(P), 0.0
    except linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(P)))
    jitter = _JITTER_START
    while jitter <= _JITTER_STOP * (1 + 1e-9):
        try:
            return _reverse_cholesky(P + jitter * scale * np.eye(P.shape[0])), jitter
        except linalg.LinAlgError:
            jitter *= 10.0
    diag = np.diag(P)
    raise NumericalError(
        "precision matrix of the beta full conditional is not positive definite",
        diagnostics={
            "min_diag": float(diag.min()),
            "max_diag": float(diag.max()),
            "max_jitter": _JITTER_STOP,
        },
    )


def _precision_factor(X, y, omega, prior_var, b):
    # returns U with U U' = X' diag(omega) X + diag(1/prior_var), and the mean
    P = (X.T * omega) @ X
    P[np.diag_indices_from(P)] += 1.0 / prior_var
    kappa = b * (y - 0.5)
    U, _ = _factor_precision(P)
    a = linalg.solve_triangular(U, X.T @ kappa, lower=False, check_finite=False)
    mean = linalg.solve_triangular(U, a, lower=False, trans="T", check_finite=False)
    return U, mean


def _full_conditional(X, y, omega, prior_var, b):
    U, mean = _precision_factor(X, y, omega, prior_var, b)
    L = linalg.solve_triangular(U, np.eye(U.shape[0]), lower=False, check_finite=False).T
    return FullConditionalNormal(mean=mean, covariance_factor=L)


def _draw_beta(X, y, omega, prior_var, b, rng):
    # same stream use as step_beta, but U^{-T} z by back-substitution instead of an explicit inverse
    U, mean = _precision_factor(X, y, omega, prior_var, b)
    z = rng.standard_normal(mean.shape[0])
    return mean + linalg.solve_triangular(U, z, lower=False, trans="T", check_finite=False)


def build_full_conditional(dataset: Dataset, omega, lambda2, tau2, alpha, phi) -> FullConditionalNormal:
    """Gaussian full conditional of beta given omega, lambda^2 and tau^2.

    Precision X' diag(omega) X + diag(1 / (lambda_j^2 tau^2)); the mean solves
    precision @ m = X' kappa with kappa_i = alpha * phi * (y_i - 1/2).
    """
    omega = np.asarray(omega, dtype=float)
    lambda2 = np.asarray(lambda2, dtype=float)
    if np.any(omega <= 0) or np.any(lambda2 <= 0) or not tau2 > 0:
        raise StateError("omega, lambda2 and tau2 must all be positive")
    return _full_conditional(dataset.X, dataset.y, omega, lambda2 * tau2, alpha * phi)


def step_beta(fc: FullConditionalNormal, rng) -> np.ndarray:
    z = rng.standard_normal(fc.mean.shape[0])
    return fc.mean + fc.covariance_factor @ z


def step_lambda2(beta, tau2, nu, rng) -> np.ndarray:
    """lambda_j^2 ~ IG(1, 1/nu_j + beta_j^2 / (2 tau^2))."""
    if not tau2 > 0:
        raise StateError(f"tau2 must be positive, got {tau2!r}")
    beta = np.asarray(beta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise StateError("nu must be positive")
    return _lambda2(beta, float(tau2), nu, rng)


def step_nu(lambda2, rng) -> np.ndarray:
    """nu_j ~ IG(1, 1 + 1/lambda_j^2)."""
    lambda2 = np.asarray(lambda2, dtype=float)
    if np.any(lambda2 <= 0):
        raise StateError("lambda2 must be positive")
    return _nu(lambda2, rng)


def step_tau2(beta, lambda2, xi, rng) -> float:
    """tau^2 ~ IG((p + 1)/2, 1/xi + sum_j beta_j^2 / (2 lambda_j^2))."""
    beta = np.asarray(beta, dtype=float)
    lambda2 = np.asarray(lambda2, dtype=float)
    if np.any(lambda2 <= 0):
        raise StateError("lambda2 must be positive")
    if not xi > 0:
        raise StateError(f"xi must be positive, got {xi!r}")
    return _tau2(beta, lambda2, float(xi), rng)


def step_xi(tau2, rng) -> float:
    """xi ~ IG(1, 1 + 1/tau^2)."""
    if not tau2 > 0:
        raise StateError(f"tau2 must be positive, got {tau2!r}")
    return _xi(float(tau2), rng)


def gibbs_sweep(state: ChainState, X, y, b, rng) -> ChainState:
    """One full sweep on raw arrays with surrogate shape ``b`` = alpha * phi.

    Works for any y in [0, 1]; boundary checks belong to :class:`Dataset`.
    """
    omega = _omega(X, state.beta, b, rng)
    beta = _draw_beta(X, y, omega, state.lambda2 * state.tau2, b, rng)
    lambda2 = _lambda2(beta, state.tau2, state.nu, rng)
    nu = _nu(lambda2, rng)
    tau2 = _tau2(beta, lambda2, state.xi, rng)
    xi = _xi(tau2, rng)
    return ChainState(beta=beta, lambda2=lambda2, nu=nu, tau2=tau2, xi=xi, omega=omega)


def run_chain(
    dataset: Dataset,
    config: FitConfig,
    rng: np.random.Generator | None = None,
    *,
    chain: int = 0,
    keep_lambda2: bool = False,
    init: ChainState | None = None,
) -> PosteriorDraws:
    """Run one chain for ``config.iterations`` sweeps and keep the post-burn-in draws.

    Without an explicit ``rng`` the stream is derived from ``config.seed`` and
    ``chain``, so identical inputs reproduce identical draws.
    """
    if rng is None:
        rng = chain_rng(config.seed, chain)
    X, y = dataset.X, dataset.y
    n, p = X.shape
    b = config.alpha * config.phi
    kept = config.kept
    beta_draws = np.empty((kept, p))
    tau2_draws = np.empty(kept)
    loglik = np.empty(kept)
    lam_draws = np.empty((kept, p)) if keep_lambda2 else None

    state = init.copy() if init is not None else ChainState.initial(n, p)
    for it in range(config.iterations):
        try:
            state = gibbs_sweep(state, X, y, b, rng)
        except NumericalError as exc:
            raise NumericalError(
                f"sampler failed at iteration {it}: {exc}",
                iteration=it, snapshot=state.copy(), diagnostics=exc.diagnostics,
            ) from exc
        if not np.all(np.isfinite(state.beta)):
            raise NumericalError(
                f"non-finite coefficients at iteration {it}", iteration=it, snapshot=state.copy(),
            )
        k = it - config.burn_in
        if k >= 0:
            beta_draws[k] = state.beta
            tau2_draws[k] = state.tau2
            loglik[k] = beta_log_likelihood(dataset, state.beta, config.phi)
            if lam_draws is not None:
                lam_draws[k] = state.lambda2
    return PosteriorDraws(
        beta_draws=beta_draws, tau2_draws=tau2_draws,
        log_likelihood_trace=loglik, lambda2_draws=lam_draws,
    )


def run_chains(dataset: Dataset, config: FitConfig, *, replication: int = 0, keep_lambda2=False):
    """All ``config.chains`` chains, each with its own derived stream."""
    return [
        run_chain(
            dataset, config, chain_rng(config.seed, c, replication),
            chain=c, keep_lambda2=keep_lambda2,
        )
        for c in range(config.chains)
    ]
