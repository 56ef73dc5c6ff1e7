"""CSV ingestion and daily-peak sample construction.

Three hourly CSV formats are read:

* observed weather: ``timestamp,sky_condition,dew_point,rel_humidity,temperature``
* forecast weather: ``valid_time,horizon_days,sky_cover,dew_point,rel_humidity,temperature``
* energy: ``timestamp,energy``

Timestamps are naive local date-hours written ``YYYY-MM-DDTHH``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PREDICTORS = ("S", "D", "R", "T")
PREDICTOR_NAMES = {
    "S": "sky_cover",
    "D": "dew_point",
    "R": "rel_humidity",
    "T": "temperature",
}
HORIZONS = (1, 2, 3, 4, 5, 6)
TIMESTAMP_FORMAT = "%Y-%m-%dT%H"

OBSERVED_HEADER = ["timestamp", "sky_condition", "dew_point", "rel_humidity", "temperature"]
FORECAST_HEADER = ["valid_time", "horizon_days", "sky_cover", "dew_point", "rel_humidity", "temperature"]
ENERGY_HEADER = ["timestamp", "energy"]

# observed sky condition label -> percentage category
SKY_COVER_CATEGORIES = {
    "clear": 0.0,
    "mostly clear": 25.0,
    "partly cloudy": 50.0,
    "mostly cloudy": 75.0,
    "cloudy": 100.0,
}
# lower bound (inclusive) of opaque cloud coverage for each label, ascending
SKY_COVER_BOUNDS = (
    (0.0, "Clear"),
    (12.5, "Mostly Clear"),
    (37.5, "Partly Cloudy"),
    (62.5, "Mostly Cloudy"),
    (87.5, "Cloudy"),
)


class IngestionError(ValueError):
    """A CSV input could not be ingested; carries file and line context."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: datetime
    sky_cover: float
    dew_point: float
    rel_humidity: float
    temperature: float

    def vector(self) -> tuple[float, float, float, float]:
        return (self.sky_cover, self.dew_point, self.rel_humidity, self.temperature)


@dataclass(frozen=True)
class ForecastRecord:
    valid_time: datetime
    horizon_days: int
    sky_cover: float
    dew_point: float
    rel_humidity: float
    temperature: float

    def vector(self) -> tuple[float, float, float, float]:
        return (self.sky_cover, self.dew_point, self.rel_humidity, self.temperature)


@dataclass(frozen=True)
class EnergyRecord:
    timestamp: datetime
    energy: float


@dataclass(frozen=True)
class DailyPeak:
    date: date
    peak_hour: int
    target: float


@dataclass(frozen=True)
class PeakSample:
    """Daily peak energy joined with the predictors (S, D, R, T) at the peak hour."""

    date: date
    peak_hour: int
    target: float
    observed: tuple[float, float, float, float]
    forecasts: dict[int, tuple[float, float, float, float]] = field(default_factory=dict)

    @property
    def timestamp(self) -> datetime:
        return datetime(self.date.year, self.date.month, self.date.day, self.peak_hour)


@dataclass(frozen=True)
class Alignment:
    samples: list[PeakSample]
    dropped: int


def adjust_sky_cover(category: str) -> float:
    """Map an observed sky-condition label to its percentage category.

    Matching is case-insensitive and ignores surrounding whitespace.

    >>> adjust_sky_cover(" partly cloudy ")
    50.0
    """
    key = " ".join(category.strip().lower().split())
    try:
        return SKY_COVER_CATEGORIES[key]
    except KeyError:
        raise IngestionError(f"unknown sky condition {category!r}") from None


def sky_condition_label(cover: float) -> str:
    """Label for a continuous opaque-cloud percentage."""
    if not 0.0 <= cover <= 100.0:
        raise ValueError(f"sky cover {cover} outside [0, 100]")
    label = SKY_COVER_BOUNDS[0][1]
    for lower, name in SKY_COVER_BOUNDS:
        if cover >= lower:
            label = name
    return label


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    # strptime accepts single-digit hours; the format is fixed-width
    if len(text) != 13:
        raise ValueError(f"timestamp {text!r} is not YYYY-MM-DDTHH")
    return datetime.strptime(text, TIMESTAMP_FORMAT)


def format_timestamp(ts: datetime) -> str:
    return ts.strftime(TIMESTAMP_FORMAT)


def _number(text: str, name: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite")
    return value


def _percent(value: float, name: str) -> float:
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name}={value} outside [0, 100]")
    return value


def _read_rows(path: str | Path, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot open file ({exc.strerror})", path) from exc
    with handle:
        reader = csv.reader(handle)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != header:
            raise IngestionError(f"expected header {','.join(header)}", path, 1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestionError(
                    f"expected {len(header)} fields, got {len(row)}", path, reader.line_num
                )
            yield reader.line_num, row


def parse_observed_csv(path: str | Path) -> list[WeatherRecord]:
    records = []
    seen: set[datetime] = set()
    for line, row in _read_rows(path, OBSERVED_HEADER):
        try:
            ts = parse_timestamp(row[0])
            sky_text = row[1].strip()
            try:
                sky = _number(sky_text, "sky_condition")
            except ValueError:
                sky = adjust_sky_cover(sky_text)
            rec = WeatherRecord(
                timestamp=ts,
                sky_cover=_percent(sky, "sky_condition"),
                dew_point=_number(row[2], "dew_point"),
                rel_humidity=_percent(_number(row[3], "rel_humidity"), "rel_humidity"),
                temperature=_number(row[4], "temperature"),
            )
        except ValueError as exc:
            raise IngestionError(str(exc), path, line) from exc
        if ts in seen:
            raise IngestionError(f"duplicate timestamp {row[0].strip()}", path, line)
        seen.add(ts)
        records.append(rec)
    records.sort(key=lambda r: r.timestamp)
    return records


def parse_forecast_csv(path: str | Path) -> list[ForecastRecord]:
    records = []
    seen: set[tuple[datetime, int]] = set()
    for line, row in _read_rows(path, FORECAST_HEADER):
        try:
            ts = parse_timestamp(row[0])
            horizon = int(row[1])
            if horizon not in HORIZONS:
                raise ValueError(f"horizon_days={horizon} outside 1..6")
            rec = ForecastRecord(
                valid_time=ts,
                horizon_days=horizon,
                sky_cover=_percent(_number(row[2], "sky_cover"), "sky_cover"),
                dew_point=_number(row[3], "dew_point"),
                rel_humidity=_percent(_number(row[4], "rel_humidity"), "rel_humidity"),
                temperature=_number(row[5], "temperature"),
            )
        except ValueError as exc:
            raise IngestionError(str(exc), path, line) from exc
        key = (ts, horizon)
        if key in seen:
            raise IngestionError(
                f"duplicate forecast for {row[0].strip()} at horizon {horizon}", path, line
            )
        seen.add(key)
        records.append(rec)
    records.sort(key=lambda r: (r.valid_time, r.horizon_days))
    return records


def parse_energy_csv(path: str | Path) -> list[EnergyRecord]:
    records = []
    seen: set[datetime] = set()
    for line, row in _read_rows(path, ENERGY_HEADER):
        try:
            ts = parse_timestamp(row[0])
            energy = _number(row[1], "energy")
            if energy < 0:
                raise ValueError(f"energy={energy} is negative")
        except ValueError as exc:
            raise IngestionError(str(exc), path, line) from exc
        if ts in seen:
            raise IngestionError(f"duplicate timestamp {row[0].strip()}", path, line)
        seen.add(ts)
        records.append(EnergyRecord(ts, energy))
    records.sort(key=lambda r: r.timestamp)
    return records


def extract_daily_peaks(energy: Sequence[EnergyRecord]) -> list[DailyPeak]:
    """One row per date whose maximum hourly energy is positive.

    Ties go to the earliest hour.
    """
    best: dict[date, EnergyRecord] = {}
    for rec in energy:
        day = rec.timestamp.date()
        cur = best.get(day)
        if (
            cur is None
            or rec.energy > cur.energy
            or (rec.energy == cur.energy and rec.timestamp < cur.timestamp)
        ):
            best[day] = rec
    return [
        DailyPeak(day, rec.timestamp.hour, rec.energy)
        for day, rec in sorted(best.items())
        if rec.energy > 0
    ]


def align(
    peaks: Sequence[DailyPeak],
    observed: Sequence[WeatherRecord],
    forecasts: Sequence[ForecastRecord] = (),
) -> Alignment:
    """Join each daily peak with the observed and forecast predictors for its hour.

    Peaks without an observed record at the peak hour are dropped and counted.
    """
    obs_by_time = {r.timestamp: r for r in observed}
    fc_by_time: dict[datetime, dict[int, tuple[float, float, float, float]]] = {}
    for f in forecasts:
        fc_by_time.setdefault(f.valid_time, {})[f.horizon_days] = f.vector()
    samples = []
    dropped = 0
    for p in peaks:
        ts = datetime(p.date.year, p.date.month, p.date.day, p.peak_hour)
        obs = obs_by_time.get(ts)
        if obs is None:
            dropped += 1
            continue
        fc = fc_by_time.get(ts, {})
        samples.append(
            PeakSample(
                date=p.date,
                peak_hour=p.peak_hour,
                target=p.target,
                observed=obs.vector(),
                forecasts={h: fc[h] for h in sorted(fc)},
            )
        )
    return Alignment(samples, dropped)


def predictor_indices(subset: str) -> list[int]:
    """Column indices of a predictor label such as ``"SDRT"`` or ``"DR"``."""
    letters = subset.upper()
    if not letters or len(set(letters)) != len(letters) or any(c not in PREDICTORS for c in letters):
        raise ValueError(f"invalid predictor subset {subset!r}")
    return [PREDICTORS.index(c) for c in PREDICTORS if c in letters]


def sample_matrix(
    samples: Sequence[PeakSample], subset: str = "SDRT", horizon: int | None = None
):
    """Predictor rows and targets from peak samples.

    ``horizon=None`` uses the observed predictors; otherwise only samples that
    carry a forecast for that horizon are included.
    """
    cols = predictor_indices(subset)
    rows, targets = [], []
    for s in samples:
        if horizon is None:
            vec = s.observed
        elif horizon in s.forecasts:
            vec = s.forecasts[horizon]
        else:
            continue
        rows.append([vec[c] for c in cols])
        targets.append(s.target)
    X = np.asarray(rows, dtype=float).reshape(len(rows), len(cols))
    return X, np.asarray(targets, dtype=float)


def load_samples(observed_path, forecast_path, energy_path) -> tuple[Alignment, list[WeatherRecord], list[ForecastRecord]]:
    """Parse all three inputs and align them into peak samples."""
    observed = parse_observed_csv(observed_path)
    forecasts = parse_forecast_csv(forecast_path) if forecast_path is not None else []
    energy = parse_energy_csv(energy_path)
    return align(extract_daily_peaks(energy), observed, forecasts), observed, forecasts
