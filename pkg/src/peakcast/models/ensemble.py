"""Weighted-average ensemble of fitted models."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import FittedModel, predict, register_predictor


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def optimal_weights(P: np.ndarray, y: np.ndarray, *, tol: float = 1e-8, max_iter: int = 50_000) -> tuple[np.ndarray, int]:
    """Simplex-constrained least squares ``min ||P w - y||^2`` by projected gradient.

    Starts from the best single column, so the result is never worse than it.
    """
    m = P.shape[1]
    sse = ((P - y[:, None]) ** 2).sum(axis=0)
    w = np.zeros(m)
    w[int(np.argmin(sse))] = 1.0
    PtP = P.T @ P
    Pty = P.T @ y
    L = 2.0 * float(np.linalg.eigvalsh(PtP)[-1])
    if L <= 0:
        return w, 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (PtP @ w - Pty)
        new = project_simplex(w - grad / L)
        if np.max(np.abs(new - w)) < tol:
            return new, it
        w = new
    return w, max_iter


def fit_ensemble(
    members: Sequence[FittedModel],
    X=None,
    y=None,
    mode: str = "equal",
    weights=None,
) -> FittedModel:
    """Combine trained members with equal, optimized or explicit weights.

    ``mode="optimized"`` needs the training rows ``X`` and targets ``y``.
    """
    members = tuple(members)
    if len(members) < 2:
        raise ValueError("an ensemble needs at least two members")
    k = members[0].n_features
    if any(m.n_features != k for m in members):
        raise ValueError("ensemble members disagree on the number of features")
    diag: dict = {"mode": mode}
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(members),) or np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-10):
            raise ValueError("explicit weights must be nonnegative, one per member, summing to 1")
        diag["mode"] = "explicit"
    elif mode == "equal":
        w = np.full(len(members), 1.0 / len(members))
    elif mode == "optimized":
        if X is None or y is None:
            raise ValueError("optimized weights need training data")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        P = np.column_stack([predict(m, X) for m in members])
        w, iters = optimal_weights(P, y)
        resid = y - P @ w
        diag.update(iterations=iters, sse=float(resid @ resid))
    else:
        raise ValueError(f"unknown ensemble mode {mode!r}")
    return FittedModel(
        kind="ENS",
        n_features=k,
        params={"weights": w, "member_kinds": [m.kind for m in members]},
        diagnostics=diag,
        members=members,
    )


@register_predictor("ENS")
def _predict_ensemble_rows(model: FittedModel, rows: np.ndarray) -> np.ndarray:
    P = np.column_stack([predict(m, rows) for m in model.members])
    return P @ model.params["weights"]


def predict_ensemble(model: FittedModel, x):
    if model.kind != "ENS":
        raise ValueError(f"predict_ensemble cannot serve a {model.kind} model")
    return predict(model, x)
