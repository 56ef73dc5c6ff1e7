"""Point-forecast error metrics over paired actual/predicted series."""
from __future__ import annotations

import numpy as np


class MetricDomainError(ValueError):
    """A metric is undefined for the given series."""


def _paired(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(actual, dtype=float).ravel()
    yhat = np.asarray(predicted, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.size} actual vs {yhat.size} predicted")
    if y.size == 0:
        raise ValueError("empty series")
    return y, yhat


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent.

    Raises MetricDomainError if any actual value is zero; percentage error is
    not defined there (the usual case for weather variables such as clear-sky
    cover), and dropping those pairs would silently change N.
    """
    y, yhat = _paired(actual, predicted)
    if np.any(y == 0):
        raise MetricDomainError(
            "MAPE is not applicable when an actual value is zero; use MAE instead"
        )
    return float(np.mean(np.abs((y - yhat) / y)) * 100.0)


def mae(actual, predicted) -> float:
    y, yhat = _paired(actual, predicted)
    return float(np.mean(np.abs(y - yhat)))


def rmse(actual, predicted) -> float:
    y, yhat = _paired(actual, predicted)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def bias(actual, predicted) -> float:
    """Mean signed error ``actual - predicted``.

    Negative values mean the predictions overestimate.
    """
    y, yhat = _paired(actual, predicted)
    return float(np.mean(y - yhat))
