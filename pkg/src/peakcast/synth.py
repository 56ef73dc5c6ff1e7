"""Synthetic hourly weather, forecasts and PV energy with a known ground truth.

The daily peak energy is an exact affine function (plus optional noise) of the
observed predictors at the peak hour, as they read after ingestion. Sky cover
is observed as a category label, so the truth uses the category percentage.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .config import SyntheticConfig
from .dataset import (
    ENERGY_HEADER,
    FORECAST_HEADER,
    HORIZONS,
    OBSERVED_HEADER,
    PREDICTORS,
    adjust_sky_cover,
    format_timestamp,
    sky_condition_label,
)

DAYLIGHT = range(6, 20)
PEAK_HOURS = (11, 12, 13, 14)
FILES = {"observed": "observed.csv", "forecast": "forecast.csv", "energy": "energy.csv"}


@dataclass
class SyntheticData:
    observed: list[tuple]  # (timestamp, sky label, dew, rh, temp)
    forecast: list[tuple]  # (timestamp, horizon, sky, dew, rh, temp)
    energy: list[tuple]  # (timestamp, energy)


def generate(cfg: SyntheticConfig, seed: int) -> SyntheticData:
    if cfg.days <= 0:
        raise ValueError("days must be positive")
    rng = np.random.default_rng(seed)
    coef = {"intercept": 0.0, **{v: 0.0 for v in PREDICTORS}, **cfg.coefficients}
    scale = {v: 1.0 for v in PREDICTORS}
    scale.update(cfg.variable_scale)
    bias = {v: 0.0 for v in PREDICTORS}
    bias.update(cfg.bias)
    start = datetime(cfg.start_date.year, cfg.start_date.month, cfg.start_date.day)

    observed, forecast, energy = [], [], []
    for d in range(cfg.days):
        season = math.sin(2 * math.pi * (d + 30) / 365.0)
        t_day = 65.0 + 10.0 * season + rng.normal(0, 4)
        spread = rng.uniform(8, 20)
        cloud_day = rng.uniform(0, 100)
        peak_hour = int(rng.choice(PEAK_HOURS))
        day_rows = []
        for h in range(24):
            ts = start + timedelta(days=d, hours=h)
            temp = round(t_day + 8.0 * math.sin(math.pi * (h - 9) / 12.0) + rng.normal(0, 1), 1)
            dew = round(min(t_day - spread + rng.normal(0, 1.5), temp), 1)
            rh = round(float(np.clip(100.0 - 2.8 * (temp - dew) + rng.normal(0, 3), 5, 100)), 1)
            label = sky_condition_label(float(np.clip(cloud_day + rng.normal(0, 15), 0, 100)))
            obs_vec = {"S": adjust_sky_cover(label), "D": dew, "R": rh, "T": temp}
            observed.append((ts, label, dew, rh, temp))
            day_rows.append((ts, obs_vec))
            for hz in HORIZONS:
                sigma = cfg.noise_std[hz - 1]
                vals = {}
                for v in PREDICTORS:
                    x = obs_vec[v] - bias[v] + (rng.normal(0, sigma * scale[v]) if sigma > 0 else 0.0)
                    if v in ("S", "R"):
                        x = min(max(x, 0.0), 100.0)
                    vals[v] = round(x, 2)
                forecast.append((ts, hz, vals["S"], vals["D"], vals["R"], vals["T"]))
        peak_vec = day_rows[peak_hour][1]
        peak = coef["intercept"] + sum(coef[v] * peak_vec[v] for v in PREDICTORS)
        if cfg.target_noise > 0:
            peak += rng.normal(0, cfg.target_noise)
        peak = max(peak, 0.5)
        for h, (ts, _) in enumerate(day_rows):
            if h == peak_hour:
                e = peak
            elif h in DAYLIGHT:
                e = 0.95 * peak * max(0.0, math.sin(math.pi * (h - 5) / 15.0))
            else:
                e = 0.0
            energy.append((ts, e))
    return SyntheticData(observed, forecast, energy)


def _num(x: float) -> str:
    return repr(float(x))


def write_csvs(data: SyntheticData, out_dir: str | Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {k: out_dir / v for k, v in FILES.items()}
    with paths["observed"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OBSERVED_HEADER)
        for ts, label, dew, rh, temp in data.observed:
            w.writerow([format_timestamp(ts), label, _num(dew), _num(rh), _num(temp)])
    with paths["forecast"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FORECAST_HEADER)
        for ts, hz, s, dew, rh, temp in sorted(data.forecast, key=lambda r: (r[0], r[1])):
            w.writerow([format_timestamp(ts), hz, _num(s), _num(dew), _num(rh), _num(temp)])
    with paths["energy"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_HEADER)
        for ts, e in data.energy:
            w.writerow([format_timestamp(ts), _num(e)])
    return paths
