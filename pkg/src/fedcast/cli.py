"""Command-line interface.

Subcommands: ``fetch``, ``stats``, ``run``, ``tune``, ``predict``. A
single JSON config file drives everything; flags override config values
which override built-in defaults.

Exit codes: 0 success, 2 configuration or validation error, 3 external
I/O error (network, missing remote data), 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path

from .config import PipelineConfig
from .errors import AuthError, ConfigError, FedcastError, HttpError
from .pipeline import (
    fetch_pipeline,
    predict_pipeline,
    run_pipeline,
    stats_pipeline,
    tune_pipeline,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_EXTERNAL = 3

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedcast",
        description="Forecast the direction of federal-funds-rate decisions "
        "from macro indicators and central-bank communications.",
    )
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("--threads", type=int, default=None, help="parallelism cap")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering PNG figures next to the delimited outputs",
    )
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fetch", help="download configured FRED series to macro CSVs")
    sub.add_parser("stats", help="emit corpus statistics and sentiment CSVs")
    sub.add_parser("run", help="train, evaluate, and explain the configured method")
    sub.add_parser("tune", help="two-stage hyperparameter search")

    predict = sub.add_parser("predict", help="probability forecast for the next meeting")
    predict.add_argument("--model", type=Path, required=True, help="model.json bundle from a run")
    predict.add_argument(
        "--as-of", type=str, required=True, help="ISO date; only data up to it is used"
    )

    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    if args.no_figures:
        overrides["figures"] = False
    return PipelineConfig.from_file(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = _load_config(args)
        if args.command == "fetch":
            api_key = os.environ.get("FRED_API_KEY", "")
            if not api_key:
                raise ConfigError("FRED_API_KEY environment variable is not set")
            written = fetch_pipeline(config, api_key)
            for path in written:
                print(path)
            return EXIT_OK
        if args.command == "stats":
            config.validate(require_data=False)
            result = stats_pipeline(config)
            print(json.dumps(result, sort_keys=True))
            return EXIT_OK
        if args.command == "run":
            report = run_pipeline(config)
            summary = {
                "method": report["method"],
                "model": report["model_family"],
                "cv_auc": report["metrics"]["cv"]["ovr_macro_auc"],
                "test_accuracy": report["metrics"]["test"]["accuracy"],
                "test_auc": report["metrics"]["test"]["ovr_macro_auc"],
                "out": str(config.output_dir),
            }
            print(json.dumps(summary, sort_keys=True))
            return EXIT_OK
        if args.command == "tune":
            payload = tune_pipeline(config)
            print(
                json.dumps(
                    {"best_params": payload["best_params"], "mean_cv_auc": payload["mean_cv_auc"]},
                    sort_keys=True,
                )
            )
            return EXIT_OK
        if args.command == "predict":
            try:
                as_of = date.fromisoformat(args.as_of)
            except ValueError:
                raise ConfigError(f"--as-of must be an ISO date, got {args.as_of!r}") from None
            result = predict_pipeline(config, args.model, as_of)
            print(json.dumps(result, sort_keys=True))
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except (HttpError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except AuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except FedcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - safety net
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
