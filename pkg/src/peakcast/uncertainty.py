"""Bootstrap summaries of error populations.

Resample ``b`` of a bootstrap always draws its indices from the same block of
a Philox4x64 counter stream keyed by the seed: it starts at counter block
``b * ceil(N / 4)``. Any range of resamples can therefore be computed on its
own, and results do not depend on how the work is split across threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .dataset import HORIZONS, PREDICTOR_NAMES, PREDICTORS, ForecastRecord, WeatherRecord

DEFAULT_B = 2500
CI_LEVEL = 0.95
RNG_NAME = "numpy.random.Philox (4x64, 10 rounds)"
_U53 = 2.0 ** -53


def _std(a: np.ndarray, axis=None):
    n = a.shape[-1]
    return np.std(a, axis=axis, ddof=1 if n > 1 else 0)


STATISTICS: dict[str, Callable] = {
    "mean": lambda a, axis=None: np.mean(a, axis=axis),
    "std": _std,
}


@dataclass(frozen=True)
class BootstrapSummary:
    statistic: str
    point: float
    boot_std: float
    ci_low: float
    ci_high: float
    B: int
    seed: int


def resample_indices(n: int, start: int, stop: int, seed: int) -> np.ndarray:
    """Indices for resamples ``start..stop-1``, shape ``(stop - start, n)``."""
    blocks = -(-n // 4)
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start * blocks)
    raw = bitgen.random_raw((stop - start) * blocks * 4).reshape(stop - start, blocks * 4)[:, :n]
    u = (raw >> np.uint64(11)).astype(np.float64) * _U53
    return np.minimum((u * n).astype(np.int64), n - 1)


def _chunk_stats(sample, stat, start, stop, seed):
    idx = resample_indices(sample.size, start, stop, seed)
    return stat(sample[idx], axis=1)


def resample_statistics(
    sample, statistic: str = "mean", B: int = DEFAULT_B, seed: int = 0, *, workers: int = 1, chunk: int = 500
) -> np.ndarray:
    """The B resample statistics, in resample order."""
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    if B < 1:
        raise ValueError("B must be at least 1")
    stat = STATISTICS[statistic]
    bounds = [(s, min(s + chunk, B)) for s in range(0, B, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda se: _chunk_stats(sample, stat, se[0], se[1], seed), bounds))
    else:
        parts = [_chunk_stats(sample, stat, s, e, seed) for s, e in bounds]
    return np.concatenate(parts)


def summarize(sample, boot: np.ndarray, statistic: str, seed: int) -> BootstrapSummary:
    sample = np.asarray(sample, dtype=float).ravel()
    tail = (1.0 - CI_LEVEL) / 2.0 * 100.0
    lo, hi = np.percentile(boot, [tail, 100.0 - tail])
    return BootstrapSummary(
        statistic=statistic,
        point=float(STATISTICS[statistic](sample)),
        boot_std=float(np.std(boot, ddof=1)) if boot.size > 1 else 0.0,
        ci_low=float(lo),
        ci_high=float(hi),
        B=int(boot.size),
        seed=int(seed),
    )


def bootstrap(sample, statistic: str = "mean", B: int = DEFAULT_B, seed: int = 0, *, workers: int = 1) -> BootstrapSummary:
    """Percentile bootstrap of ``statistic`` (``"mean"`` or ``"std"``) with a 95% CI."""
    boot = resample_statistics(sample, statistic, B, seed, workers=workers)
    return summarize(sample, boot, statistic, seed)


@dataclass(frozen=True)
class HorizonErrorStats:
    """Forecast-error statistics of one weather variable at one horizon.

    ``mae`` bootstraps the mean absolute error (its ``boot_std`` is the
    standard error of the MAE); ``abs_error_std`` bootstraps the standard
    deviation of the absolute-error population.
    """

    variable: str
    horizon: int
    n: int
    bias: float | None = None
    mae: BootstrapSummary | None = None
    abs_error_std: BootstrapSummary | None = None
    resamples: np.ndarray | None = None

    @property
    def missing(self) -> bool:
        return self.n == 0


def forecast_pairs(
    observed: Sequence[WeatherRecord], forecasts: Sequence[ForecastRecord], variable: str, horizon: int
) -> tuple[np.ndarray, np.ndarray]:
    """Observed and forecast values of one variable at matching hours."""
    field = PREDICTOR_NAMES.get(variable, variable)
    obs: dict[datetime, float] = {r.timestamp: getattr(r, field) for r in observed}
    y, yhat = [], []
    for f in forecasts:
        if f.horizon_days == horizon and f.valid_time in obs:
            y.append(obs[f.valid_time])
            yhat.append(getattr(f, field))
    return np.asarray(y, dtype=float), np.asarray(yhat, dtype=float)


def _seed_for(seed: int, variable: str, horizon: int) -> int:
    # distinct, reproducible Philox key per (variable, horizon) cell
    return (seed << 8) | (PREDICTORS.index(variable) << 4) | horizon


def horizon_error_stats(
    observed: Sequence[WeatherRecord],
    forecasts: Sequence[ForecastRecord],
    variable: str,
    *,
    B: int = DEFAULT_B,
    seed: int = 0,
    horizons: Sequence[int] = HORIZONS,
    workers: int = 1,
) -> list[HorizonErrorStats]:
    """Bias and bootstrap MAE statistics for each horizon; empty horizons are marked missing."""
    out = []
    for h in horizons:
        y, yhat = forecast_pairs(observed, forecasts, variable, h)
        if y.size == 0:
            out.append(HorizonErrorStats(variable, h, 0))
            continue
        abs_err = np.abs(y - yhat)
        key = _seed_for(seed, variable, h)
        boot_mean = resample_statistics(abs_err, "mean", B, key, workers=workers)
        boot_std = resample_statistics(abs_err, "std", B, key, workers=workers)
        out.append(
            HorizonErrorStats(
                variable=variable,
                horizon=h,
                n=int(y.size),
                bias=metrics.bias(y, yhat),
                mae=summarize(abs_err, boot_mean, "mean", key),
                abs_error_std=summarize(abs_err, boot_std, "std", key),
                resamples=boot_mean,
            )
        )
    return out


def clt_ci_width(sigma: float, n: int, level: float = CI_LEVEL) -> float:
    """Normal-theory width of a mean CI, used as a sanity reference."""
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    return 2.0 * z * sigma / math.sqrt(n)
