"""Least-squares (MLR) and quantile (QR) linear regression.

Both take a design matrix whose first column is the intercept column of ones
and return coefficients ``(b0, b1, ..., bk)``; predictions use raw predictor
rows without the intercept column.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError, SingularDesignError
from .base import FittedModel, predict, register_predictor

COND_LIMIT = 1e13


def design_matrix(rows) -> np.ndarray:
    """Prepend the intercept column to predictor rows."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    return np.column_stack([np.ones(rows.shape[0]), rows])


def _check_design(X, y=None) -> tuple[np.ndarray, np.ndarray | None]:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("design matrix must be 2-D with an intercept column")
    if not np.all(X[:, 0] == 1.0):
        raise ValueError("first design column must be the all-ones intercept")
    if y is not None:
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"{X.shape[0]} design rows but {y.shape[0]} targets")
    return X, y


def qr_design(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR of a design matrix, refusing rank-deficient input."""
    n, p = X.shape
    if n < p:
        raise SingularDesignError(f"{n} rows cannot determine {p} coefficients")
    Q, R = np.linalg.qr(X)
    d = np.abs(np.diag(R))
    if d.min() == 0.0 or np.linalg.cond(R) > COND_LIMIT:
        raise SingularDesignError("design matrix is rank deficient (X^T X not invertible)")
    return Q, R


def fit_mlr(X, y) -> FittedModel:
    X, y = _check_design(X, y)
    n, p = X.shape
    if n <= p:
        raise SingularDesignError(f"need more than {p} observations, got {n}")
    Q, R = qr_design(X)
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    return FittedModel(
        kind="MLR",
        n_features=p - 1,
        params={"coef": coef},
        diagnostics={"n": n, "sse": float(resid @ resid)},
    )


@register_predictor("MLR", "QR")
def _predict_linear_rows(model: FittedModel, rows: np.ndarray) -> np.ndarray:
    coef = model.params["coef"]
    return coef[0] + rows @ coef[1:]


def pinball_loss(residuals, tau: float) -> float:
    """Sum of asymmetric absolute losses: ``tau*r`` for r >= 0, ``(tau-1)*r`` below."""
    r = np.asarray(residuals, dtype=float)
    return float(np.sum(np.where(r >= 0, tau * r, (tau - 1.0) * r)))


def _irls(X, y, tau, *, delta0=1e-2, delta_min=1e-8, max_iter=200):
    """Huber-smoothed pinball minimisation by reweighted least squares."""
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    scale = float(np.std(y)) or 1.0
    delta = delta0
    it = 0
    while it < max_iter:
        r = y - X @ coef
        w = np.where(r >= 0, tau, 1.0 - tau) / np.maximum(np.abs(r), delta * scale)
        sw = np.sqrt(w)
        new = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]
        it += 1
        step = np.max(np.abs(new - coef)) / (1.0 + np.max(np.abs(coef)))
        coef = new
        if step < 1e-10:
            if delta <= delta_min:
                break
            delta = max(delta / 10.0, delta_min)
    return coef, it


def _initial_basis(X, r) -> list[int]:
    """Rows with the smallest |residual| that together span the column space."""
    p = X.shape[1]
    basis: list[int] = []
    Q = np.zeros((0, p))
    for i in np.argsort(np.abs(r), kind="stable"):
        v = X[i] - Q.T @ (Q @ X[i])
        nv = np.linalg.norm(v)
        if nv > 1e-10 * (1.0 + np.linalg.norm(X[i])):
            basis.append(int(i))
            Q = np.vstack([Q, v / nv])
            if len(basis) == p:
                return basis
    raise SingularDesignError("design matrix is rank deficient")


def _exchange(X, y, tau, basis, max_pivots):
    """Basis-exchange descent over the vertices of the pinball loss.

    Each basis of p rows defines the fit interpolating those rows. A pivot
    frees one basis row along the edge with the most negative directional
    derivative and moves to the breakpoint minimising the loss on that ray;
    the row whose residual reaches zero there enters the basis.
    """
    n, p = X.shape
    scale = max(float(np.max(np.abs(y))), 1.0)
    zero_tol = 1e-12 * scale
    coef = np.linalg.solve(X[basis], y[basis])
    for pivot in range(max_pivots):
        r = y - X @ coef
        Binv = np.linalg.inv(X[basis])
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        r[in_basis] = 0.0
        zero = np.abs(r) <= zero_tol
        best = None
        for j in range(p):
            for sign in (1.0, -1.0):
                d = sign * Binv[:, j]
                g = X @ d
                slope = np.where(
                    zero,
                    np.where(g > 0, (1.0 - tau) * g, -tau * g),
                    np.where(r > 0, -tau * g, (1.0 - tau) * g),
                ).sum()
                if slope < -1e-12 * (1.0 + np.abs(g).sum()):
                    if best is None or slope < best[0]:
                        best = (slope, j, d, g)
        if best is None:
            return coef, pivot
        slope, j, d, g = best
        cand = (~in_basis) & (~zero) & (g != 0)
        t = np.full(n, np.inf)
        t[cand] = r[cand] / g[cand]
        order = [i for i in np.argsort(t, kind="stable") if cand[i] and t[i] > 0]
        enter = None
        for i in order:
            slope += abs(g[i])
            if slope >= 0:
                enter = i
                break
        if enter is None:
            raise ConvergenceError("quantile loss unbounded along an edge")
        basis = list(basis)
        basis[j] = int(enter)
        coef = np.linalg.solve(X[basis], y[basis])
    raise ConvergenceError(
        "quantile regression did not reach an optimal vertex",
        pivots=max_pivots,
        loss=pinball_loss(y - X @ coef, tau),
    )


def fit_qr(X, y, tau: float = 0.5, *, max_iter: int = 200, max_pivots: int | None = None) -> FittedModel:
    """Linear quantile regression at level ``tau``.

    A smoothed IRLS pass (smoothing annealed from 1e-2 to 1e-8 of the target
    scale) gives a warm start; an exact basis-exchange descent then lands on an
    optimal vertex, so the returned fit interpolates at least p observations.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    X, y = _check_design(X, y)
    n, p = X.shape
    if n <= p:
        raise SingularDesignError(f"need more than {p} observations, got {n}")
    qr_design(X)
    warm, irls_iter = _irls(X, y, tau, max_iter=max_iter)
    basis = _initial_basis(X, y - X @ warm)
    coef, pivots = _exchange(X, y, tau, basis, max_pivots or (50 * n + 100))
    return FittedModel(
        kind="QR",
        n_features=p - 1,
        params={"coef": coef, "tau": float(tau)},
        diagnostics={
            "n": n,
            "irls_iterations": irls_iter,
            "pivots": pivots,
            "loss": pinball_loss(y - X @ coef, tau),
        },
    )


def predict_linear(model: FittedModel, x):
    if model.kind not in ("MLR", "QR"):
        raise ValueError(f"predict_linear cannot serve a {model.kind} model")
    return predict(model, x)
