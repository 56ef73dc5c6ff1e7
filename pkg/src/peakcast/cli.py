"""Command-line entry point: ``peakcast {synth,select,weather-error,run}``.

Exit codes: 0 success, 1 configuration or input/output error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, load_config
from .dataset import IngestionError
from .errors import NumericalError
from .selection import best_per_criterion

EXIT_OK, EXIT_IO, EXIT_NUMERIC = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON); defaults to a synthetic run")
    common.add_argument("--out", type=Path, help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="replace every seed in the config")
    common.add_argument("--bic-form", choices=("printed", "standard"), help="BIC penalty form")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="peakcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="write synthetic observed/forecast/energy CSVs")
    sub.add_parser("select", parents=[common], help="score all predictor subsets")
    sub.add_parser("weather-error", parents=[common], help="forecast-error statistics per horizon")
    sub.add_parser("run", parents=[common], help="train on observed, evaluate per horizon")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg.output_dir = args.out
    if args.bic_form is not None:
        cfg.bic_form = args.bic_form
    return cfg


def _run(args) -> int:
    cfg = _load(args)
    out = cfg.output_dir
    if args.command == "synth":
        for kind, path in pipeline.cmd_synth(cfg).items():
            print(f"{kind}: {path}")
        return EXIT_OK
    if args.command == "select":
        scores = pipeline.cmd_select(cfg)
        for criterion, subset in best_per_criterion(scores).items():
            print(f"best by {criterion}: {subset}")
        for s in scores:
            if s.error:
                print(f"subset {s.subset} failed: {s.error}", file=sys.stderr)
        print(f"wrote {out / 'subset_scores.csv'}")
        return EXIT_OK
    if args.command == "weather-error":
        stats = pipeline.cmd_weather_error(cfg)
        for s in stats:
            if s.missing:
                print(f"{s.variable} D#{s.horizon}: no forecast pairs", file=sys.stderr)
            else:
                print(
                    f"{s.variable} D#{s.horizon}: bias={s.bias:.3f} mae={s.mae.point:.3f} "
                    f"ci=[{s.mae.ci_low:.3f}, {s.mae.ci_high:.3f}] n={s.n}"
                )
        print(f"wrote {out / 'weather_error.csv'}")
        return EXIT_OK
    report = pipeline.cmd_run(cfg)
    for name, value in report.train_mape.items():
        seq = " ".join(f"{report.horizon_mape.get(name, {}).get(h, float('nan')):.2f}" for h in range(1, 7))
        print(f"{name}: train MAPE {value:.2f}%  horizons 1-6: {seq}")
    for name, err in report.failures.items():
        print(f"model {name} failed: {err}", file=sys.stderr)
    print(f"wrote {out / 'mape_by_horizon.csv'}")
    return EXIT_NUMERIC if report.failures else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (ConfigError, IngestionError, OSError, ValueError, pipeline.PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
