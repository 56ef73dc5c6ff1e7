"""All-subsets predictor selection with information criteria and PRESS-style CV."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .dataset import PREDICTORS, PeakSample, sample_matrix
from .errors import DegenerateTargetError, NumericalError, SingularDesignError
from .models.linear import design_matrix, fit_mlr, qr_design

BIC_FORMS = ("printed", "standard")
CRITERIA = ("rmse", "rbar2", "aic", "aicc", "bic", "cv")
REPORT_COLUMNS = ("subset",) + CRITERIA


@dataclass(frozen=True)
class SubsetScore:
    subset: str
    rmse: float
    rbar2: float
    aic: float
    aicc: float
    bic: float
    cv: float
    sse: float
    error: str | None = None


def hat_diagonals(X) -> np.ndarray:
    """Leverages ``diag(X (X^T X)^-1 X^T)`` from a thin QR, without forming H."""
    X = np.asarray(X, dtype=float)
    Q, _ = qr_design(X)
    return np.sum(Q * Q, axis=1)


def rbar2(sse: float, sst: float, n: int, k: int) -> float:
    """Adjusted R^2 with ``R^2 = 1 - sse/sst`` for k predictors and n observations."""
    if n <= k + 1:
        raise ValueError(f"adjusted R^2 needs N > k+1 (N={n}, k={k})")
    if sst <= 0:
        raise DegenerateTargetError("target has zero total sum of squares")
    r2 = 1.0 - sse / sst
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


def aic(sse: float, n: int, k: int) -> float:
    if sse <= 0:
        raise DegenerateTargetError("AIC undefined for a perfect fit (log of zero SSE)")
    return n * math.log(sse / n) + 2 * (k + 2)


def aicc(aic_value: float, n: int, k: int) -> float:
    if n <= k + 1:
        raise ValueError(f"AICc needs N > k+1 (N={n}, k={k})")
    return aic_value + 2 * k * (k + 1) / (n - k - 1)


def bic(sse: float, n: int, k: int, form: str = "printed") -> float:
    """BIC; ``form="printed"`` uses ``2(k+2) ln N``, ``"standard"`` uses ``(k+2) ln N``."""
    if form not in BIC_FORMS:
        raise ValueError(f"bic form must be one of {BIC_FORMS}")
    if n < 2:
        raise ValueError("BIC needs N >= 2")
    if sse <= 0:
        raise DegenerateTargetError("BIC undefined for a perfect fit (log of zero SSE)")
    factor = 2 if form == "printed" else 1
    return n * math.log(sse / n) + factor * (k + 2) * math.log(n)


def cv_press(residuals, leverages) -> float:
    e = np.asarray(residuals, dtype=float)
    h = np.asarray(leverages, dtype=float)
    if e.shape != h.shape:
        raise ValueError("residuals and leverages differ in length")
    if np.any(h >= 1.0):
        raise SingularDesignError("leave-one-out residual undefined where leverage is 1")
    return float(np.mean((e / (1.0 - h)) ** 2))


def all_subsets(letters: Sequence[str] = PREDICTORS) -> list[str]:
    """Nonempty subsets, full set first, then by decreasing size in SDRT order."""
    out = []
    for size in range(len(letters), 0, -1):
        out.extend("".join(c) for c in combinations(letters, size))
    return out


def score_subset(X: np.ndarray, y: np.ndarray, label: str, bic_form: str = "printed") -> SubsetScore:
    """Score one predictor set; ``X`` holds predictor columns without the intercept."""
    n, k = X.shape
    D = design_matrix(X)
    fit = fit_mlr(D, y)
    resid = y - D @ fit.params["coef"]
    sse = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    a = aic(sse, n, k)
    return SubsetScore(
        subset=label,
        rmse=math.sqrt(sse / n),
        rbar2=rbar2(sse, sst, n, k),
        aic=a,
        aicc=aicc(a, n, k),
        bic=bic(sse, n, k, bic_form),
        cv=cv_press(resid, hat_diagonals(D)),
        sse=sse,
    )


def score_all_subsets(
    samples: Sequence[PeakSample],
    horizon: int | None = None,
    bic_form: str = "printed",
    predictors: str = "SDRT",
) -> list[SubsetScore]:
    """Score every nonempty subset of ``predictors``.

    ``horizon=None`` scores on observed predictors, an integer on that
    horizon's forecasts. Subsets whose fit fails get a row with NaN scores and
    the error message.
    """
    X, y = sample_matrix(samples, predictors, horizon)
    if len(y) < len(predictors) + 4:
        raise ValueError(
            f"need at least {len(predictors) + 4} samples to score all subsets, got {len(y)}"
        )
    rows = []
    for label in all_subsets(predictors):
        cols = [predictors.index(c) for c in label]
        try:
            rows.append(score_subset(X[:, cols], y, label, bic_form))
        except (NumericalError, ValueError) as exc:
            nan = float("nan")
            rows.append(SubsetScore(label, nan, nan, nan, nan, nan, nan, nan, error=str(exc)))
    return rows


def best_per_criterion(scores: Sequence[SubsetScore]) -> dict[str, str]:
    """Winning subset per criterion: maximum adjusted R^2, minimum of the rest."""
    ok = [s for s in scores if s.error is None]
    best = {}
    for c in CRITERIA:
        if not ok:
            break
        pick = max if c == "rbar2" else min
        best[c] = pick(ok, key=lambda s: getattr(s, c)).subset
    return best


def sort_scores(scores: Sequence[SubsetScore], by: str = "rmse") -> list[SubsetScore]:
    if by not in CRITERIA:
        raise ValueError(f"unknown criterion {by!r}")
    sign = -1.0 if by == "rbar2" else 1.0
    return sorted(
        scores,
        key=lambda s: (s.error is not None, sign * getattr(s, by) if s.error is None else 0.0),
    )


def scores_csv(scores: Sequence[SubsetScore]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for s in scores:
        w.writerow([s.subset] + [repr(getattr(s, c)) for c in CRITERIA])
    return buf.getvalue()


def scores_json(scores: Sequence[SubsetScore], **extra) -> str:
    doc = {
        "columns": list(REPORT_COLUMNS),
        "rows": [_json_row(s) for s in scores],
        "best": best_per_criterion(scores),
    }
    doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)


def _json_row(s: SubsetScore) -> dict:
    row = asdict(s)
    for k, v in row.items():
        if isinstance(v, float) and not math.isfinite(v):
            row[k] = None
    return row
