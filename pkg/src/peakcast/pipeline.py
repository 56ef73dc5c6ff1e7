"""Experiment orchestration behind the CLI subcommands.

Models are always trained on observed predictors and then evaluated on the
observed predictors and on each forecast horizon's predictors.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, selection, synth, uncertainty
from .config import ExperimentConfig, spec_name
from .dataset import HORIZONS, PREDICTORS, PeakSample, load_samples, sample_matrix
from .errors import NumericalError
from .models import FittedModel, design_matrix, fit_ann, fit_ensemble, fit_mlr, fit_qr, fit_svr, predict

log = logging.getLogger(__name__)

OBSERVED = "observed"
TRAIN = "train"


class PipelineError(RuntimeError):
    pass


@dataclass
class Inputs:
    samples: list[PeakSample]
    dropped: int
    observed: list
    forecasts: list
    paths: dict[str, Path]


@dataclass
class HorizonReport:
    """MAPE per model on the training set, the observed evaluation set and each horizon."""

    train_mape: dict[str, float] = field(default_factory=dict)
    observed_mape: dict[str, float] = field(default_factory=dict)
    horizon_mape: dict[str, dict[int, float]] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")
    return path


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def cmd_synth(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict[str, Path]:
    """Write the synthetic observed, forecast and energy CSVs."""
    if cfg.synthetic is None:
        raise PipelineError("config has no synthetic block")
    data = synth.generate(cfg.synthetic, cfg.synthetic_seed)
    return synth.write_csvs(data, out_dir or cfg.output_dir)


def load_inputs(cfg: ExperimentConfig) -> Inputs:
    """Ingest the configured CSVs, generating them under ``<out>/data`` when synthetic."""
    if cfg.inputs is not None:
        paths = {
            "observed": cfg.inputs.observed,
            "forecast": cfg.inputs.forecast,
            "energy": cfg.inputs.energy,
        }
    else:
        paths = cmd_synth(cfg, cfg.output_dir / "data")
    alignment, observed, forecasts = load_samples(paths["observed"], paths["forecast"], paths["energy"])
    if alignment.dropped:
        log.warning("dropped %d peak(s) without an observed weather record", alignment.dropped)
    return Inputs(alignment.samples, alignment.dropped, observed, forecasts, paths)


def cmd_select(cfg: ExperimentConfig, inputs: Inputs | None = None) -> list[selection.SubsetScore]:
    inputs = inputs or load_inputs(cfg)
    scores = selection.score_all_subsets(
        inputs.samples, bic_form=cfg.bic_form, predictors=cfg.predictors
    )
    out = cfg.output_dir
    _write(out / "subset_scores.csv", selection.scores_csv(scores))
    _write(
        out / "subset_scores.json",
        selection.scores_json(
            scores, n_samples=len(inputs.samples), dropped=inputs.dropped, bic_form=cfg.bic_form
        ),
    )
    return scores


def cmd_weather_error(cfg: ExperimentConfig, inputs: Inputs | None = None) -> list[uncertainty.HorizonErrorStats]:
    inputs = inputs or load_inputs(cfg)
    stats = []
    for v in PREDICTORS:
        stats.extend(
            uncertainty.horizon_error_stats(
                inputs.observed,
                inputs.forecasts,
                v,
                B=cfg.bootstrap.B,
                seed=cfg.bootstrap_seed,
                workers=cfg.workers,
            )
        )
    write_weather_error(stats, cfg.output_dir)
    return stats


WEATHER_COLUMNS = (
    "variable", "horizon", "n", "bias", "mae_mean", "mae_std", "ci_low", "ci_high",
    "abs_err_std", "abs_err_std_boot",
)


def write_weather_error(stats, out: Path) -> None:
    rows, ci_rows, dist_rows, doc = [], [], [], []
    for s in stats:
        if s.missing:
            rows.append([s.variable, s.horizon, 0] + [""] * 7)
            ci_rows.append([s.variable, s.horizon, "", ""])
            doc.append({"variable": s.variable, "horizon": s.horizon, "n": 0, "missing": True})
            continue
        rec = {
            "variable": s.variable,
            "horizon": s.horizon,
            "n": s.n,
            "bias": s.bias,
            "mae_mean": s.mae.point,
            "mae_std": s.mae.boot_std,
            "ci_low": s.mae.ci_low,
            "ci_high": s.mae.ci_high,
            "abs_err_std": s.abs_error_std.point,
            "abs_err_std_boot": s.abs_error_std.boot_std,
        }
        rows.append([_fmt(rec[c]) for c in WEATHER_COLUMNS])
        ci_rows.append([s.variable, s.horizon, _fmt(s.mae.ci_low), _fmt(s.mae.ci_high)])
        q = np.percentile(s.resamples, [0, 2.5, 25, 50, 75, 97.5, 100])
        dist_rows.append([s.variable, s.horizon] + [_fmt(float(v)) for v in q] + [_fmt(float(np.mean(s.resamples)))])
        doc.append({**rec, "missing": False, "B": s.mae.B, "seed": s.mae.seed})
    _write(out / "weather_error.csv", _csv(WEATHER_COLUMNS, rows))
    _write(out / "weather_error_ci.csv", _csv(("variable", "horizon", "ci_low", "ci_high"), ci_rows))
    _write(
        out / "weather_error_resamples.csv",
        _csv(("variable", "horizon", "min", "p2_5", "p25", "p50", "p75", "p97_5", "max", "mean"), dist_rows),
    )
    _write(
        out / "weather_error.json",
        json.dumps({"rng": uncertainty.RNG_NAME, "rows": doc}, indent=2, sort_keys=True),
    )


def split_samples(samples: list[PeakSample], holdout_fraction: float):
    """Chronological split; without holdout the evaluation set is the training set."""
    if holdout_fraction <= 0:
        return samples, samples
    ordered = sorted(samples, key=lambda s: s.date)
    n_train = int(round(len(ordered) * (1.0 - holdout_fraction)))
    if n_train < 1 or n_train >= len(ordered):
        raise PipelineError("holdout fraction leaves an empty training or evaluation set")
    return ordered[:n_train], ordered[n_train:]


def train_models(cfg: ExperimentConfig, X: np.ndarray, y: np.ndarray, source: str):
    """Fit every configured model; failures are collected, not raised."""
    if source != OBSERVED:
        raise PipelineError("models must be trained on observed predictors only")
    fitted: dict[str, FittedModel] = {}
    failures: dict[str, str] = {}
    for spec in cfg.models:
        name = spec_name(spec)
        try:
            if spec.kind == "MLR":
                model = fit_mlr(design_matrix(X), y)
            elif spec.kind == "QR":
                model = fit_qr(design_matrix(X), y, spec.tau)
            elif spec.kind == "SVR":
                model = fit_svr(
                    X, y, spec.C, spec.epsilon, spec.kernel, spec.gamma, standardize=spec.standardize
                )
            elif spec.kind == "ANN":
                model = fit_ann(X, y, spec.hidden_neurons, spec.max_epochs, cfg.ann_seed(spec))
            else:
                broken = [m for m in spec.members if m not in fitted]
                if broken:
                    raise PipelineError(f"ensemble member(s) failed or not yet trained: {broken}")
                members = [fitted[m] for m in spec.members]
                if isinstance(spec.weights, list):
                    model = fit_ensemble(members, weights=spec.weights)
                else:
                    model = fit_ensemble(members, X, y, mode=spec.weights)
        except (NumericalError, PipelineError, ValueError) as exc:
            log.error("model %s failed: %s", name, exc)
            failures[name] = f"{type(exc).__name__}: {exc}"
            continue
        fitted[name] = model
    return fitted, failures


def cmd_run(cfg: ExperimentConfig, inputs: Inputs | None = None) -> HorizonReport:
    inputs = inputs or load_inputs(cfg)
    train, evaluation = split_samples(inputs.samples, cfg.holdout_fraction)
    X_train, y_train = sample_matrix(train, cfg.predictors)
    if len(y_train) <= len(cfg.predictors) + 1:
        raise PipelineError(f"only {len(y_train)} training samples")
    fitted, failures = train_models(cfg, X_train, y_train, OBSERVED)

    sets = {TRAIN: (train, None)}
    sets[OBSERVED] = (evaluation, None)
    for h in HORIZONS:
        sets[f"h{h}"] = (evaluation, h)

    report = HorizonReport(failures=dict(failures))
    audit = []
    for source, (pool, horizon) in sets.items():
        X, y = sample_matrix(pool, cfg.predictors, horizon)
        keep = [s for s in pool if horizon is None or horizon in s.forecasts]
        report.counts[source] = len(y)
        if len(y) == 0:
            continue
        for name, model in fitted.items():
            yhat = np.asarray(predict(model, X), dtype=float)
            value = metrics.mape(y, yhat)
            if source == TRAIN:
                report.train_mape[name] = value
            elif source == OBSERVED:
                report.observed_mape[name] = value
            else:
                report.horizon_mape.setdefault(name, {})[horizon] = value
            for s, a, p in zip(keep, y, yhat):
                audit.append([name, source, s.date.isoformat(), s.peak_hour, repr(float(a)), repr(float(p))])

    out = cfg.output_dir
    for name, model in fitted.items():
        _write(out / "models" / f"{name}.json", model.to_json())
    _write(
        out / "predictions_audit.csv",
        _csv(("model", "source", "date", "peak_hour", "actual", "predicted"), audit),
    )
    write_mape_report(report, list(fitted), out)
    return report


def write_mape_report(report: HorizonReport, names: list[str], out: Path) -> None:
    rows = []
    for name in names:
        rows.append([name, TRAIN, report.counts.get(TRAIN, 0), _fmt(report.train_mape.get(name))])
        rows.append([name, OBSERVED, report.counts.get(OBSERVED, 0), _fmt(report.observed_mape.get(name))])
        for h in HORIZONS:
            rows.append([name, h, report.counts.get(f"h{h}", 0), _fmt(report.horizon_mape.get(name, {}).get(h))])
    _write(out / "mape_by_horizon.csv", _csv(("model", "source", "n", "mape"), rows))
    plot = [[0] + [_fmt(report.observed_mape.get(n)) for n in names]]
    for h in HORIZONS:
        plot.append([h] + [_fmt(report.horizon_mape.get(n, {}).get(h)) for n in names])
    _write(out / "mape_plot.csv", _csv(["horizon"] + names, plot))
    doc = {
        "counts": report.counts,
        "failures": report.failures,
        "models": {
            n: {
                "train": report.train_mape.get(n),
                "observed": report.observed_mape.get(n),
                "horizons": {str(h): v for h, v in report.horizon_mape.get(n, {}).items()},
            }
            for n in names
        },
    }
    _write(out / "mape_by_horizon.json", json.dumps(doc, indent=2, sort_keys=True))
