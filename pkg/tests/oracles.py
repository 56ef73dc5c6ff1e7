"""Independent reference computations used by the tests.

Nothing here calls into the code under test.
"""
import itertools
import math

import mpmath
import numpy as np
from scipy.optimize import linprog


def normal_equation_scores(X, y, bic_factor=2.0):
    """Subset-selection scores from explicit (X^T X)^-1 and the full hat matrix."""
    n, k = X.shape
    D = np.column_stack([np.ones(n), X])
    inv = np.linalg.inv(D.T @ D)
    beta = inv @ D.T @ y
    e = y - D @ beta
    sse = float(e @ e)
    sst = float(((y - y.mean()) ** 2).sum())
    H = D @ inv @ D.T
    h = np.diag(H)
    aic = n * math.log(sse / n) + 2 * (k + 2)
    return {
        "beta": beta,
        "sse": sse,
        "rmse": math.sqrt(sse / n),
        "rbar2": 1 - (sse / sst) * (n - 1) / (n - k - 1),
        "aic": aic,
        "aicc": aic + 2 * k * (k + 1) / (n - k - 1),
        "bic": n * math.log(sse / n) + bic_factor * (k + 2) * math.log(n),
        "cv": float(np.mean((e / (1 - h)) ** 2)),
        "h": h,
    }


def quantile_lp(D, y, tau):
    """Pinball-loss minimum via the standard LP with split residuals."""
    n, p = D.shape
    c = np.r_[np.zeros(p), tau * np.ones(n), (1 - tau) * np.ones(n)]
    A = np.hstack([D, np.eye(n), -np.eye(n)])
    res = linprog(c, A_eq=A, b_eq=y, bounds=[(None, None)] * p + [(0, None)] * (2 * n), method="highs")
    assert res.status == 0
    return res.fun, res.x[:p]


def pinball(r, tau):
    r = np.asarray(r, dtype=float)
    return float(np.sum(np.maximum(tau * r, (tau - 1) * r)))


def svr_dual_enumeration(K, y, C, eps):
    """Global minimum of the SVR dual by enumerating every active-set pattern.

    Variables b_i = alpha_i - alpha*_i in [-C, C], sum b = 0, objective
    1/2 b^T K b + eps sum|b| - y^T b. Each b_i is at -C, 0 or +C, or free with a
    fixed sign; each free pattern is an equality-constrained QP solved exactly.
    K must be positive definite.
    """
    n = len(y)
    best = math.inf
    best_b = None
    states = ("-C", "0", "+C", "neg", "pos")
    for pattern in itertools.product(states, repeat=n):
        b = np.zeros(n)
        free = [i for i, s in enumerate(pattern) if s in ("neg", "pos")]
        fixed = [i for i in range(n) if i not in free]
        for i in fixed:
            b[i] = {"-C": -C, "0": 0.0, "+C": C}[pattern[i]]
        if free:
            sgn = np.array([1.0 if pattern[i] == "pos" else -1.0 for i in free])
            m = len(free)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = K[np.ix_(free, free)]
            A[:m, m] = 1.0
            A[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[:m] = y[free] - eps * sgn - K[np.ix_(free, fixed)] @ b[fixed]
            rhs[m] = -b[fixed].sum()
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            bf = sol[:m]
            if np.any(sgn * bf < -1e-12) or np.any(np.abs(bf) > C + 1e-12):
                continue
            b[free] = bf
        elif abs(b.sum()) > 1e-12:
            continue
        obj = 0.5 * b @ K @ b + eps * np.abs(b).sum() - y @ b
        if obj < best:
            best, best_b = obj, b.copy()
    return best, best_b


def svr_kkt_violation(coef, b, K, y, C, eps):
    """Largest violation of the SVR optimality conditions, in target units."""
    f = K @ coef + b
    r = y - f
    tolc = 1e-9 * C
    worst = 0.0
    for bi, ri in zip(coef, r):
        if abs(bi) <= tolc:
            v = max(abs(ri) - eps, 0.0)
        elif bi >= C - tolc:
            v = max(eps - ri, 0.0)
        elif bi <= -C + tolc:
            v = max(eps + ri, 0.0)
        elif bi > 0:
            v = abs(ri - eps)
        else:
            v = abs(ri + eps)
        worst = max(worst, v)
    return worst, abs(coef.sum())


def mp_network_output(theta, Z, hidden):
    """One-hidden-layer tanh network evaluated in mpmath, same parameter layout."""
    n, k = len(Z), len(Z[0])
    o = hidden * k
    out = []
    for row in Z:
        acc = theta[o + 2 * hidden]
        for h in range(hidden):
            a = theta[o + h] + mpmath.fsum(theta[h * k + j] * row[j] for j in range(k))
            acc += theta[o + hidden + h] * mpmath.tanh(a)
        out.append(acc)
    return out


def central_difference_jacobian(theta, Z, hidden, digits=50):
    """d(output)/d(theta) by central differences at high working precision."""
    with mpmath.workdps(digits):
        th = [mpmath.mpf(float(v)) for v in theta]
        Zm = [[mpmath.mpf(float(v)) for v in row] for row in Z]
        step = mpmath.mpf(10) ** (-digits // 3)
        J = np.empty((len(Zm), len(th)))
        for j in range(len(th)):
            tp, tm = list(th), list(th)
            tp[j] += step
            tm[j] -= step
            fp, fm = mp_network_output(tp, Zm, hidden), mp_network_output(tm, Zm, hidden)
            for i in range(len(Zm)):
                J[i, j] = float((fp[i] - fm[i]) / (2 * step))
    return J
