"""Sparse Bayesian Beta regression with a Horseshoe prior and Polya-Gamma Gibbs sampling."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import DomainError, NumericalError, ParameterError, StateError
from .model import (
    ChainState,
    Dataset,
    FitConfig,
    PosteriorDraws,
    PosteriorSummary,
    beta_log_likelihood,
    estimate_phi_moments,
    inv_logit,
    logit,
    pool_draws,
    summarize,
)
from .pg import PgParams, sample_pg, sample_pg_vector
from .gibbs import run_chain, run_chains
from .baselines import LassoFit, fit_lasso_path, fit_transformed_lasso, lasso_selected, transform_response
from .simgen import SimData, SimScenario, generate
from .metrics import MetricsReport, evaluate, estimation_errors, selection_metrics
from .diagnostics import acf, ess, export_traces

__all__ = [
    "__version__",
    "DomainError", "NumericalError", "ParameterError", "StateError",
    "ChainState", "Dataset", "FitConfig", "PosteriorDraws", "PosteriorSummary",
    "beta_log_likelihood", "estimate_phi_moments", "inv_logit", "logit", "pool_draws", "summarize",
    "PgParams", "sample_pg", "sample_pg_vector",
    "run_chain", "run_chains",
    "LassoFit", "fit_lasso_path", "fit_transformed_lasso", "lasso_selected", "transform_response",
    "SimData", "SimScenario", "generate",
    "MetricsReport", "evaluate", "estimation_errors", "selection_metrics",
    "acf", "ess", "export_traces",
]
