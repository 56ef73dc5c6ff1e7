"""Single-hidden-layer feed-forward network trained by Levenberg-Marquardt.

Inputs and target are z-scored; the hidden layer uses tanh and the output is
linear. Parameters are packed into one vector as ``[W1 (H x k), b1 (H), w2 (H), b2]``.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError
from .base import FittedModel, predict, register_predictor

LAMBDA_INIT = 1e-3
LAMBDA_MAX = 1e10


def n_params(n_inputs: int, hidden: int) -> int:
    return hidden * n_inputs + 2 * hidden + 1


def unpack(theta: np.ndarray, n_inputs: int, hidden: int):
    W1 = theta[: hidden * n_inputs].reshape(hidden, n_inputs)
    o = hidden * n_inputs
    b1 = theta[o : o + hidden]
    w2 = theta[o + hidden : o + 2 * hidden]
    b2 = theta[o + 2 * hidden]
    return W1, b1, w2, b2


def network_output(theta: np.ndarray, Z: np.ndarray, hidden: int) -> np.ndarray:
    """Network output in standardized target units for standardized inputs ``Z``."""
    W1, b1, w2, b2 = unpack(theta, Z.shape[1], hidden)
    return np.tanh(Z @ W1.T + b1) @ w2 + b2


def network_jacobian(theta: np.ndarray, Z: np.ndarray, hidden: int) -> np.ndarray:
    """d(output_n) / d(theta) as an (N, n_params) matrix."""
    n, k = Z.shape
    W1, b1, w2, _ = unpack(theta, k, hidden)
    A = np.tanh(Z @ W1.T + b1)
    dA = (1.0 - A * A) * w2  # (N, H)
    J = np.empty((n, n_params(k, hidden)))
    J[:, : hidden * k] = (dA[:, :, None] * Z[:, None, :]).reshape(n, hidden * k)
    o = hidden * k
    J[:, o : o + hidden] = dA
    J[:, o + hidden : o + 2 * hidden] = A
    J[:, -1] = 1.0
    return J


def _scaler(a: np.ndarray):
    mean = a.mean(axis=0)
    scale = a.std(axis=0)
    return mean, np.where(scale == 0, 1.0, scale)


def init_params(n_inputs: int, hidden: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lim_in = 1.0 / np.sqrt(n_inputs)
    lim_hid = 1.0 / np.sqrt(hidden)
    W1 = rng.uniform(-lim_in, lim_in, size=(hidden, n_inputs))
    b1 = rng.uniform(-lim_in, lim_in, size=hidden)
    w2 = rng.uniform(-lim_hid, lim_hid, size=hidden)
    return np.concatenate([W1.ravel(), b1, w2, [0.0]])


def levenberg_marquardt(theta, Z, t, hidden, *, max_epochs=100, tol=1e-9):
    """Minimise 1/2 ||t - f(theta)||^2. Returns theta and a diagnostics dict.

    The damping starts at 1e-3, is divided by 10 after an accepted step and
    multiplied by 10 after a rejected one. A damping above 1e10 ends training
    if the gradient has vanished and raises ConvergenceError otherwise.
    """
    theta = np.array(theta, dtype=float)
    lam = LAMBDA_INIT
    e = t - network_output(theta, Z, hidden)
    obj = 0.5 * float(e @ e)
    history = [obj]
    reason = "max_epochs"
    eye = np.eye(theta.size)
    epochs = 0
    for epochs in range(1, max_epochs + 1):
        J = network_jacobian(theta, Z, hidden)
        g = J.T @ e
        JtJ = J.T @ J
        while True:
            try:
                step = np.linalg.solve(JtJ + lam * eye, g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                cand = theta + step
                e_new = t - network_output(cand, Z, hidden)
                obj_new = 0.5 * float(e_new @ e_new)
                if obj_new < obj:
                    lam = max(lam / 10.0, 1e-20)
                    break
            lam *= 10.0
            if lam > LAMBDA_MAX:
                if np.max(np.abs(g)) <= 1e-6 * (1.0 + obj):
                    return theta, _diag(epochs - 1, history, lam, "stationary")
                raise ConvergenceError(
                    "Levenberg-Marquardt damping exceeded limit", objective=obj, epoch=epochs
                )
        change = obj - obj_new
        theta, e, obj = cand, e_new, obj_new
        history.append(obj)
        if change < tol:
            reason = "tolerance"
            break
    return theta, _diag(epochs, history, lam, reason)


def _diag(epochs, history, lam, reason):
    return {
        "epochs": epochs,
        "objective_history": list(history),
        "final_objective": history[-1],
        "final_lambda": lam,
        "stop_reason": reason,
    }


def fit_ann(X, y, hidden_neurons: int = 10, max_epochs: int = 100, seed: int = 0) -> FittedModel:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float).ravel()
    if hidden_neurons < 1:
        raise ValueError("hidden_neurons must be >= 1")
    if y.shape[0] != X.shape[0] or y.size == 0:
        raise ValueError("X and y must have the same nonzero number of rows")
    x_mean, x_scale = _scaler(X)
    y_mean, y_scale = _scaler(y)
    Z = (X - x_mean) / x_scale
    t = (y - y_mean) / y_scale
    theta0 = init_params(X.shape[1], hidden_neurons, seed)
    theta, diag = levenberg_marquardt(theta0, Z, t, hidden_neurons, max_epochs=max_epochs)
    diag["n"] = int(y.size)
    diag["seed"] = int(seed)
    return FittedModel(
        kind="ANN",
        n_features=X.shape[1],
        params={
            "theta": theta,
            "hidden": int(hidden_neurons),
            "x_mean": x_mean,
            "x_scale": x_scale,
            "y_mean": float(y_mean),
            "y_scale": float(y_scale),
        },
        diagnostics=diag,
    )


@register_predictor("ANN")
def _predict_ann_rows(model: FittedModel, rows: np.ndarray) -> np.ndarray:
    p = model.params
    Z = (rows - p["x_mean"]) / p["x_scale"]
    return network_output(p["theta"], Z, int(p["hidden"])) * p["y_scale"] + p["y_mean"]


def predict_ann(model: FittedModel, x):
    if model.kind != "ANN":
        raise ValueError(f"predict_ann cannot serve a {model.kind} model")
    return predict(model, x)
