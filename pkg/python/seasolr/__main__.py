"""Command-line entry point.

Run ``seasolr --help`` for usage. Subcommands:

* ``ingest`` -- validate a ``date,aqi``/``date,category`` CSV into canonical JSON;
* ``describe`` -- frequency, transition, month-intensity, rate-evolution and
  grouped-distribution tables, each as CSV and JSON;
* ``fit`` -- fit TSOLR or ISOLR on the training window;
* ``forecast`` -- rolling one-step forecasts over the test window with any model;
* ``assoc`` -- auto-association profile over lags;
* ``experiment`` -- replicated simulation studies.

Every command writes ``run_config.json`` (the merged configuration) into its
output directory, which defaults to ``$SEASOLR_OUT`` or ``./seasolr-out``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import date, timedelta
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .association import association_profile, null_band
from .baselines import fit_baseline, forecast_baseline_window, save_baseline
from .config import POLR_MODELS, RunConfig, load_run_config
from .encoders import write_json
from .errors import InvalidSeriesError
from .io import load_series_any, save_series, series_summary, write_frame
from .metrics import accuracy, confusion_matrix, weighted_f1
from .polr import PolrModel, fit_model, forecast_window
from .series import (
    CategoryScheme,
    OrdinalSeries,
    category_distribution_by,
    frequency_distribution,
    month_category_intensity,
    rate_evolution,
    transition_matrix,
)
from .simulation import PRESETS, SimConfig, run_experiment

logger = logging.getLogger("seasolr")


def _date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an ISO date (YYYY-MM-DD), got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``seasolr`` CLI."""

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run configuration.")
    common.add_argument("--seed", type=int, default=None, help="Random seed.")
    common.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Output directory (defaults to $SEASOLR_OUT or ./seasolr-out).",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr.")

    parser = argparse.ArgumentParser(
        prog="seasolr",
        description="Ordinal categorical time series with multiple seasonality.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", parents=[common], help="Validate a CSV into series JSON.")
    ingest.add_argument("csv", type=Path, help="CSV with header date,aqi or date,category.")
    ingest.add_argument(
        "--categories",
        type=int,
        default=None,
        help="Use a generic K-category scheme instead of the AQI scheme.",
    )

    describe = sub.add_parser("describe", parents=[common], help="Descriptive tables.")
    describe.add_argument("series", type=Path, help="Series JSON or CSV.")

    fit = sub.add_parser("fit", parents=[common], help="Fit TSOLR or ISOLR.")
    fit.add_argument("series", type=Path, help="Series JSON or CSV.")
    fit.add_argument("--model", choices=POLR_MODELS, default=None)
    fit.add_argument("--train-end", type=_date, default=None, help="Last training date.")

    forecast = sub.add_parser("forecast", parents=[common], help="Forecast a test window.")
    forecast.add_argument("series", type=Path, help="Series JSON or CSV.")
    forecast.add_argument("--model", choices=("tsolr", "isolr", "markov", "mtd", "par"), default=None)
    forecast.add_argument("--order", type=int, default=None, help="Baseline order p.")
    forecast.add_argument(
        "--model-file", type=Path, default=None, help="Use a fitted TSOLR/ISOLR model JSON."
    )
    forecast.add_argument("--train-end", type=_date, default=None)
    forecast.add_argument("--test-start", type=_date, default=None)
    forecast.add_argument("--test-end", type=_date, default=None)
    forecast.add_argument("--mode", choices=("rolling", "recursive"), default=None)

    assoc = sub.add_parser("assoc", parents=[common], help="Auto-association profile.")
    assoc.add_argument("series", type=Path, help="Series JSON or CSV.")
    assoc.add_argument("--max-lag", type=int, default=None)
    assoc.add_argument(
        "--null-replicates",
        type=int,
        default=0,
        help="Also write a Monte-Carlo independence band from this many series.",
    )

    experiment = sub.add_parser("experiment", parents=[common], help="Simulation study.")
    experiment.add_argument("kind", choices=("consistency", "forecasting"))
    experiment.add_argument("--preset", choices=sorted(PRESETS), default=None)
    experiment.add_argument("--replicates", type=int, default=None)
    experiment.add_argument("--sizes", type=int, nargs="+", default=None)
    experiment.add_argument("--workers", type=int, default=None)

    return parser


def _configure_logging(verbose: bool) -> None:
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(getattr(h, "_seasolr", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._seasolr = True  # type: ignore[attr-defined]
        logger.addHandler(handler)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI.

    Args:
        argv: Optional argument list (defaults to ``sys.argv``).

    Returns:
        int: ``0`` on success, ``1`` on invalid input or data, ``2`` on usage
        errors (raised by argparse as ``SystemExit``).
    """

    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = load_run_config(
            args.config,
            seed=args.seed,
            out=args.out,
            model=getattr(args, "model", None),
            order=getattr(args, "order", None),
            train_end=getattr(args, "train_end", None),
            test_start=getattr(args, "test_start", None),
            test_end=getattr(args, "test_end", None),
            forecast_mode=getattr(args, "mode", None),
            max_lag=getattr(args, "max_lag", None),
        )
        return _COMMANDS[args.command](args, config)
    except (ValueError, FileNotFoundError) as exc:
        rows = getattr(exc, "rows", None) if isinstance(exc, InvalidSeriesError) else None
        suffix = f" (lines/rows: {', '.join(map(str, rows))})" if rows else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return 1


def _prepare_out(config: RunConfig) -> Path:
    out = config.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    write_json(config, out / "run_config.json")
    return out


def _load(path: Path) -> OrdinalSeries:
    return load_series_any(path)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _ingest_command(args: argparse.Namespace, config: RunConfig) -> int:
    scheme = CategoryScheme.ordinal(args.categories) if args.categories else CategoryScheme.aqi()
    series = load_series_any(args.csv, scheme)
    out = _prepare_out(config)
    save_series(series, out / "series.json")
    summary = series_summary(series)
    write_json(summary, out / "summary.json")
    print(f"{summary['observations']} observation(s) from {summary['start']} to {summary['end']}")
    for label, count in summary["counts"].items():  # type: ignore[union-attr]
        print(f"  {label}: {count}")
    if summary["gap_days"]:
        print(f"Gaps: {summary['gap_days']} missing day(s) before rows {summary['gap_positions']}")
    else:
        print("Gaps: none")
    return 0


def _label_frame(matrix: np.ndarray, labels: Sequence[str], first: str, keys: Sequence) -> pd.DataFrame:
    frame = pd.DataFrame(matrix, columns=list(labels))
    frame.insert(0, first, list(keys))
    return frame


def _write_table(frame: pd.DataFrame, out: Path, stem: str) -> None:
    """Write ``frame`` as ``<stem>.csv`` and as ``<stem>.json`` (one object per row)."""

    write_frame(frame, out / f"{stem}.csv")
    write_json({"columns": frame.columns.tolist(), "rows": frame.to_dict(orient="records")}, out / f"{stem}.json")


def _describe_command(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args.series)
    labels = series.scheme.labels
    out = _prepare_out(config)

    freq = frequency_distribution(series)
    _write_table(
        pd.DataFrame(
            {"code": range(len(labels)), "category": labels, "count": freq.counts, "proportion": freq.proportions}
        ),
        out,
        "frequency",
    )
    for lag in config.transition_lags:
        tm = transition_matrix(series, lag)
        frame = _label_frame(tm.probabilities, labels, "from", labels)
        frame["supported"] = [i not in tm.empty_rows for i in range(len(labels))]
        _write_table(frame, out, f"transition_lag{lag}")
    months = list(range(1, 13))
    _write_table(_label_frame(month_category_intensity(series), labels, "month", months), out, "month_intensity")
    _write_table(
        _label_frame(month_category_intensity(series, normalize=True), labels, "month", months),
        out,
        "month_intensity_pct",
    )
    _write_table(_label_frame(rate_evolution(series), labels, "date", series.date_list()), out, "rate_evolution")

    groupings = ["year", "season", "daytype"]
    if config.calendar.festivals:
        groupings.append("festival_phase")
    for grouping in groupings:
        grouped = category_distribution_by(series, grouping, config.calendar)
        frame = _label_frame(grouped.counts, labels, "group", grouped.groups)
        for j, label in enumerate(labels):
            frame[f"{label}_pct"] = grouped.percentages[:, j]
        _write_table(frame, out, f"by_{grouping}")
    write_json(series_summary(series), out / "summary.json")
    print(f"Wrote descriptive tables to {out}")
    return 0


def _split(series: OrdinalSeries, config: RunConfig) -> Tuple[OrdinalSeries, date, Optional[date]]:
    train_end = config.train_end
    test_start = config.test_start
    if train_end is None and test_start is None:
        raise ValueError("Give --train-end or --test-start to define the training window")
    if train_end is None:
        train_end = test_start - timedelta(days=1)  # type: ignore[operator]
    if test_start is None:
        test_start = train_end + timedelta(days=1)
    return series.window(end=train_end), test_start, config.test_end


def _print_fit(model: PolrModel) -> None:
    report = model.report
    print(model.summary_frame().to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    print(f"log-likelihood: {report.log_likelihood:.4f}  n: {report.n_obs}  converged: {report.converged}")


def _fit_command(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args.series)
    train = series.window(end=config.train_end) if config.train_end else series
    model = fit_model(train, config.covariate_spec(), name=config.model, options=config.fit)
    out = _prepare_out(config)
    model.save(out / "model.json")
    write_frame(model.summary_frame(), out / "fit_summary.csv")
    _print_fit(model)
    return 0


def _forecast_command(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args.series)
    out = _prepare_out(config)
    if config.model in POLR_MODELS or args.model_file is not None:
        if args.model_file is not None:
            model = PolrModel.load(args.model_file)
            if config.test_start is None:
                raise ValueError("--test-start is required with --model-file")
            test_start, test_end = config.test_start, config.test_end
        else:
            train, test_start, test_end = _split(series, config)
            model = fit_model(train, config.covariate_spec(), name=config.model, options=config.fit)
            model.save(out / "model.json")
        result = forecast_window(model, series, test_start, test_end, mode=config.forecast_mode)
        name = model.name
    else:
        train, test_start, test_end = _split(series, config)
        baseline = fit_baseline(config.model, train, config.order)  # type: ignore[arg-type]
        save_baseline(baseline, out / "model.json")
        result = forecast_baseline_window(baseline, series, test_start, test_end)
        name = f"{config.model}({config.order})"

    write_frame(result.to_frame(series.scheme.labels), out / "forecast.csv")
    metrics: Dict[str, object] = {
        "model": name,
        "forecasts": int(result.observed.size),
        "accuracy": accuracy(result.observed, result.predicted),
        "weighted_f1": weighted_f1(result.observed, result.predicted),
        "confusion_matrix": confusion_matrix(
            result.observed, result.predicted, series.scheme.n_categories
        ),
    }
    write_json(metrics, out / "metrics.json")
    print(
        f"{name}: {metrics['forecasts']} forecast(s), "
        f"accuracy {100 * metrics['accuracy']:.2f}%, "  # type: ignore[operator]
        f"weighted F1 {100 * metrics['weighted_f1']:.2f}%"  # type: ignore[operator]
    )
    return 0


def _assoc_command(args: argparse.Namespace, config: RunConfig) -> int:
    series = _load(args.series)
    min_lag = min(1, config.max_lag)
    profile = association_profile(series, config.max_lag, config.measures, min_lag=min_lag)
    out = _prepare_out(config)
    frame = profile.to_frame()
    write_frame(frame, out / "association.csv")
    write_json(profile, out / "association.json")
    if args.null_replicates > 0 and config.max_lag >= 1:
        probs = frequency_distribution(series).proportions
        band = null_band(
            probs,
            len(series),
            config.max_lag,
            config.measures,
            replicates=args.null_replicates,
            seed=config.seed,
        )
        write_frame(band.to_frame(), out / "association_null_band.csv")
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return 0


def _experiment_command(args: argparse.Namespace, config: RunConfig) -> int:
    process = "tsolr" if args.kind == "consistency" else "isolr"
    overrides = {
        key: value
        for key, value in {
            "replicates": args.replicates,
            "sizes": args.sizes,
            "workers": args.workers,
            "seed": args.seed,
        }.items()
        if value is not None
    }
    if config.experiment is not None and args.preset is None:
        sim = SimConfig.model_validate({**config.experiment.model_dump(), **overrides})
    else:
        sim = SimConfig.preset(args.preset or f"{process}3", **{"seed": config.seed, **overrides})
    if sim.process != process:
        raise ValueError(f"The {args.kind} experiment needs a {process} configuration")
    result = run_experiment(sim)
    out = _prepare_out(config.model_copy(update={"experiment": sim}))
    table = result.to_frame()
    write_frame(table, out / f"{args.kind}.csv")
    write_json(result, out / f"{args.kind}.json")
    print(table.to_string(index=False))
    for n in result.sizes:
        if result.excluded[n]:
            print(f"n={n}: {result.excluded[n]} replicate(s) excluded")
    return 0


_COMMANDS = {
    "ingest": _ingest_command,
    "describe": _describe_command,
    "fit": _fit_command,
    "forecast": _forecast_command,
    "assoc": _assoc_command,
    "experiment": _experiment_command,
}


if __name__ == "__main__":
    raise SystemExit(main())
