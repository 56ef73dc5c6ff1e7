"""Epsilon-insensitive support vector regression trained by SMO.

The dual is solved in the 2N-variable form

    min  1/2 a^T Q a + p^T a   s.t.  z^T a = 0,  0 <= a <= C

with ``a = [alpha, alpha*]``, ``z = [+1.., -1..]``, ``p = [eps - y, eps + y]``
and ``Q_ij = z_i z_j K(x_i, x_j)``. Working pairs are chosen by maximal
violation for the first index and second-order gain for the second.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError
from .base import FittedModel, predict, register_predictor

KERNELS = ("linear", "rbf")


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float | None = None) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def dual_objective(coef: np.ndarray, K: np.ndarray, y: np.ndarray, epsilon: float) -> float:
    """``1/2 b^T K b + eps * sum|b| - y^T b`` for signed coefficients ``b = alpha - alpha*``."""
    return float(0.5 * coef @ K @ coef + epsilon * np.abs(coef).sum() - y @ coef)


def _smo(K, y, C, epsilon, tol, max_iter):
    n = y.shape[0]
    z = np.concatenate([np.ones(n), -np.ones(n)])
    a = np.zeros(2 * n)
    G = np.concatenate([epsilon - y, epsilon + y])
    diag = np.tile(np.diag(K), 2)
    idx = np.tile(np.arange(n), 2)
    for it in range(max_iter):
        up = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
        low = ((z > 0) & (a > 0)) | ((z < 0) & (a < C))
        mz = -z * G
        if not up.any() or not low.any():
            return a, G, it, 0.0
        cand = np.where(up, mz, -np.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        gmin = float(np.min(mz[low]))
        gap = gmax - gmin
        if gap < tol:
            return a, G, it, gap
        Ki = K[idx[i]][idx]
        b = gmax - mz
        quad = diag[i] + diag - 2.0 * Ki
        quad = np.where(quad > 0, quad, 1e-12)
        gain = np.where(low & (b > 0), -(b * b) / quad, np.inf)
        j = int(np.argmin(gain))
        step = b[j] / quad[j]
        step = min(step, C - a[i] if z[i] > 0 else a[i], a[j] if z[j] > 0 else C - a[j])
        a[i] += z[i] * step
        a[j] -= z[j] * step
        for m in (i, j):
            if a[m] < 1e-12 * C:
                a[m] = 0.0
            elif a[m] > C * (1 - 1e-12):
                a[m] = C
        Kj = K[idx[j]][idx]
        G += z * step * (Ki - Kj)
    up = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
    low = ((z > 0) & (a > 0)) | ((z < 0) & (a < C))
    mz = -z * G
    gap = float(np.max(mz[up]) - np.min(mz[low]))
    raise ConvergenceError("SMO hit the iteration cap", iterations=max_iter, max_violation=gap)


def _offset(a, G, C, n):
    z = np.concatenate([np.ones(n), -np.ones(n)])
    zg = z * G
    free = (a > 0) & (a < C)
    if free.any():
        rho = float(np.mean(zg[free]))
    else:
        at_upper = a >= C
        at_lower = a <= 0
        ub_set = (at_upper & (z < 0)) | (at_lower & (z > 0))
        lb_set = (at_upper & (z > 0)) | (at_lower & (z < 0))
        ub = float(np.min(zg[ub_set])) if ub_set.any() else np.inf
        lb = float(np.max(zg[lb_set])) if lb_set.any() else -np.inf
        rho = (ub + lb) / 2.0
    return -rho


def fit_svr(
    X,
    y,
    C: float = 1.0,
    epsilon: float = 0.1,
    kernel: str = "linear",
    gamma: float | None = None,
    *,
    standardize: bool = True,
    tol: float = 1e-3,
    max_iter: int = 200_000,
) -> FittedModel:
    """Fit SVR on predictor rows (no intercept column; the offset ``b`` is native).

    With ``standardize`` the inputs are z-scored before the kernel is applied
    and the scaling constants are stored with the model. ``gamma`` defaults to
    ``1 / n_features`` for the rbf kernel. ``tol`` bounds the maximal violating
    pair gap at termination, as in libsvm.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).ravel()
    n, k = X.shape
    if y.shape[0] != n or n == 0:
        raise ValueError("X and y must have the same nonzero number of rows")
    if not C > 0:
        raise ValueError("C must be positive")
    if not epsilon >= 0:
        raise ValueError("epsilon must be nonnegative")
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}")
    if kernel == "rbf":
        gamma = 1.0 / k if gamma is None else float(gamma)
        if not gamma > 0:
            raise ValueError("gamma must be positive")
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean, scale = np.zeros(k), np.ones(k)
    Z = (X - mean) / scale
    K = kernel_matrix(Z, Z, kernel, gamma)
    a, G, iterations, gap = _smo(K, y, float(C), float(epsilon), tol, max_iter)
    coef_all = a[:n] - a[n:]
    b = _offset(a, G, float(C), n)
    sv = coef_all != 0
    params = {
        "dual_coef": coef_all[sv],
        "support": Z[sv],
        "support_index": np.flatnonzero(sv).astype(float),
        "intercept": float(b),
        "kernel": kernel,
        "C": float(C),
        "epsilon": float(epsilon),
        "x_mean": mean,
        "x_scale": scale,
    }
    if kernel == "rbf":
        params["gamma"] = gamma
    return FittedModel(
        kind="SVR",
        n_features=k,
        params=params,
        diagnostics={
            "n": n,
            "iterations": iterations,
            "max_violation": float(gap),
            "n_support": int(sv.sum()),
            "dual_objective": dual_objective(coef_all, K, y, float(epsilon)),
        },
    )


@register_predictor("SVR")
def _predict_svr_rows(model: FittedModel, rows: np.ndarray) -> np.ndarray:
    p = model.params
    Z = (rows - p["x_mean"]) / p["x_scale"]
    coef = p["dual_coef"]
    if coef.size == 0:
        return np.full(rows.shape[0], p["intercept"])
    support = np.asarray(p["support"]).reshape(coef.size, model.n_features)
    K = kernel_matrix(Z, support, p["kernel"], p.get("gamma"))
    return K @ coef + p["intercept"]


def predict_svr(model: FittedModel, x):
    if model.kind != "SVR":
        raise ValueError(f"predict_svr cannot serve a {model.kind} model")
    return predict(model, x)
