"""Command-line interface: synth, featurize, train-eval, correlate, report.

Exit codes: 0 success (possibly with warnings), 2 configuration error,
3 data error, 4 degenerate experiment. The LIMBSENSE_LOG environment
variable sets log verbosity (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, DegenerateExperimentError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limbsense",
        description=(
            "Wrist accelerometry pipeline: synthesize fixtures, extract "
            "windowed features, train and evaluate six severity classifiers "
            "(severe means ARAT strictly below the configured cutoff)."
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the configured seed")
        return p

    add("synth", "generate a synthetic bilateral dataset on disk")

    p_feat = add("featurize", "extract per-window feature CSVs and use ratios")
    p_feat.add_argument(
        "--jobs", type=int, default=1, help="parallel featurize workers"
    )
    p_feat.add_argument(
        "--windows", help="comma-separated window lengths, e.g. 15,30,120"
    )

    p_train = add("train-eval", "grid-search, train, and evaluate all models")
    p_train.add_argument(
        "--windows", help="comma-separated window lengths, e.g. 15,30,120"
    )
    p_train.add_argument(
        "--seeds",
        help="comma-separated seeds for a multi-seed sweep; each run lands "
        "in output_dir/seed_<n>/",
    )

    add("correlate", "Pearson correlation between ARAT and use ratio")
    add("report", "re-render roc.svg from report.csv and roc_points.csv")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    windows = getattr(args, "windows", None)
    if windows:
        try:
            overrides["window_minutes_set"] = tuple(
                int(w) for w in windows.split(",")
            )
        except ValueError as exc:
            raise ConfigError(f"bad --windows value {windows!r}") from exc
    return load_config(Path(args.config), overrides)


def _cmd_synth(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    n = pipeline.run_synth(config)
    print(f"synthesized {n} patients into {config.accel_dir}")
    return EXIT_OK


def _cmd_featurize(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    out = pipeline.run_featurize(config, jobs=args.jobs)
    print(f"feature tables written to {out}")
    return EXIT_OK


def _cmd_train_eval(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --seeds value {args.seeds!r}") from exc
        base_out = Path(config.output_dir)
        for seed in seeds:
            sweep_config = load_config(
                Path(args.config),
                {"seed": seed, "output_dir": str(base_out / f"seed_{seed}")},
            )
            _copy_features(base_out, Path(sweep_config.output_dir), config)
            result = pipeline.run_train_eval(sweep_config)
            _print_report(result)
        return EXIT_OK
    result = pipeline.run_train_eval(config)
    _print_report(result)
    return EXIT_OK


def _copy_features(source: Path, target: Path, config: RunConfig) -> None:
    """Seed sweeps reuse the single featurize pass from the base directory."""
    target.mkdir(parents=True, exist_ok=True)
    for window in config.window_minutes_set:
        name = f"features_{window}.csv"
        if not (source / name).exists():
            raise DataError(f"missing {source / name}; run featurize first")
        (target / name).write_bytes((source / name).read_bytes())


def _print_report(result) -> None:
    print("model,window_minutes,test_auc")
    for cell in result.cells:
        print(f"{cell.kind},{cell.window_minutes},{cell.test_auc:.3f}")


def _cmd_correlate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    r, n = pipeline.run_correlate(config)
    print(f"pearson r(arat, use_ratio) = {r:.3f} over {n} patients")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    rows = pipeline.run_report(config)
    print("model,window_minutes,test_auc,cv_mean_auc,best_params")
    for row in rows:
        print(
            f"{row.model},{row.window_minutes},{row.test_auc:.3f},"
            f"{row.cv_mean_auc:.3f},{row.best_params}"
        )
    print(f"roc.svg refreshed in {config.output_dir}")
    return EXIT_OK


_HANDLERS = {
    "synth": _cmd_synth,
    "featurize": _cmd_featurize,
    "train-eval": _cmd_train_eval,
    "correlate": _cmd_correlate,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("LIMBSENSE_LOG", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except DegenerateExperimentError as exc:
        log.error("degenerate experiment: %s", exc)
        return EXIT_DEGENERATE
    except DataError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
