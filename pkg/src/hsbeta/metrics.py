"""Estimation, prediction and variable-selection metrics against a known truth.

Rates whose denominator is zero (e.g. precision with an empty selection)
are reported as ``None`` rather than 0.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import ParameterError

__all__ = ["MetricsReport", "estimation_errors", "selection_metrics", "evaluate", "METRIC_NAMES"]

METRIC_NAMES = (
    "l2_beta", "l2_linpred", "l2_y", "l2_ytest",
    "precision", "recall", "f1", "specificity", "fdr",
)


@dataclass(frozen=True)
class MetricsReport:
    l2_beta: Optional[float] = None
    l2_linpred: Optional[float] = None
    l2_y: Optional[float] = None
    l2_ytest: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    specificity: Optional[float] = None
    fdr: Optional[float] = None
    tp: Optional[int] = None
    fp: Optional[int] = None
    tn: Optional[int] = None
    fn: Optional[int] = None

    def merge(self, other: "MetricsReport") -> "MetricsReport":
        """Fields set in ``other`` override those of ``self``."""
        changes = {k: v for k, v in asdict(other).items() if v is not None}
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(num, den):
    return None if den == 0 else num / den


def estimation_errors(beta_hat, beta0, X, X_test, y, y_test) -> MetricsReport:
    """Squared-error metrics of a coefficient estimate.

    l2_beta = |b - b0|^2 / p, l2_linpred = |X b - X b0|^2 / n, and the mean squared
    difference between observed responses and the fitted means inv_logit(X b),
    on the training data (l2_y) and on the test data (l2_ytest).
    """
    beta_hat = np.asarray(beta_hat, dtype=float).reshape(-1)
    beta0 = np.asarray(beta0, dtype=float).reshape(-1)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    X_test = np.atleast_2d(np.asarray(X_test, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    y_test = np.asarray(y_test, dtype=float).reshape(-1)
    p = beta0.size
    if beta_hat.size != p or X.shape[1] != p or X_test.shape[1] != p:
        raise ParameterError("coefficient and design dimensions disagree")
    if X.shape[0] != y.size or X_test.shape[0] != y_test.size:
        raise ParameterError("design rows and response lengths disagree")
    diff = beta_hat - beta0
    return MetricsReport(
        l2_beta=float(diff @ diff / p),
        l2_linpred=float(np.mean((X @ diff) ** 2)),
        l2_y=float(np.mean((y - expit(X @ beta_hat)) ** 2)),
        l2_ytest=float(np.mean((y_test - expit(X_test @ beta_hat)) ** 2)),
    )


def selection_metrics(selected, beta0) -> MetricsReport:
    selected = np.asarray(selected, dtype=bool).reshape(-1)
    truth = np.asarray(beta0, dtype=float).reshape(-1) != 0
    if selected.size != truth.size:
        raise ParameterError("selection and truth have different lengths")
    tp = int(np.sum(selected & truth))
    fp = int(np.sum(selected & ~truth))
    tn = int(np.sum(~selected & ~truth))
    fn = int(np.sum(~selected & truth))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    # 2PR/(P+R) written in counts; undefined together with precision
    f1 = None if precision is None or recall is None else 2 * tp / (2 * tp + fp + fn)
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        specificity=_ratio(tn, tn + fp),
        fdr=_ratio(fp, tp + fp),
        tp=tp, fp=fp, tn=tn, fn=fn,
    )


def evaluate(beta_hat, selected, beta0, X, y, X_test, y_test) -> MetricsReport:
    return estimation_errors(beta_hat, beta0, X, X_test, y, y_test).merge(
        selection_metrics(selected, beta0)
    )
