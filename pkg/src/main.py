"""
Forecast Verification - Main Entry Point

Subcommands:
1. score      - skill report (actual and potential) per forecast column
2. calibrate  - fit mse / mae / variance linear calibrations, write calibrated columns
3. ensemble   - nMAE/nRMSE scatter data with the Pareto front marked
4. synth      - seeded AR(1) observations with synthetic forecasts

Primary output goes to --out (or stdout); progress and summaries go to stderr.
"""
import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import (
    DEFAULT_HORIZON,
    DEFAULT_OBS_COL,
    DEFAULT_SEED,
    EXIT_OK,
    FORECAST_NOISE_SHAPES,
    LOG_LEVEL,
)
from utils.formatting import (
    calibrations_to_csv,
    format_calibration,
    format_calibration_table,
    reports_to_csv,
    reports_to_json,
    reports_to_text,
)
from utils.synthetic import SynthSpec, generate_dataset
from verification.calibration import SCHEMES, apply, calibration_table
from verification.ensemble import (
    ensemble_summary,
    evaluate_ensemble,
    render_scatter_svg,
    rows_to_frame,
    scatter_export,
)
from verification.errors import DataError, ParameterError, VerificationError
from verification.metrics import dispersion_ratio, lag_autocorrelation, pearson
from verification.reference import verify
from verification.series import (
    ForecastSeries,
    ObservationSeries,
    ingest_csv,
    ingest_table,
    pair,
    split_pairs,
)


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors raised as ParameterError (exit code 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParameterError(message)


def status(message: str = "") -> None:
    print(message, file=sys.stderr)


def banner(title: str) -> None:
    status("=" * 60)
    status(title)
    status("=" * 60)


def parse_normalizer(text: str) -> Optional[float]:
    """'mean' -> None (mean observation per forecast), 'capacity:<value>' -> value."""
    if text == "mean":
        return None
    if text.startswith("capacity:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad capacity value in --normalize {text!r}")
        if not value > 0:
            raise ParameterError(f"capacity must be positive, got {value}")
        return value
    raise ParameterError(f"--normalize must be 'mean' or 'capacity:<value>', got {text!r}")


def parse_columns(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    columns = [c.strip() for c in text.split(",") if c.strip()]
    if not columns:
        raise ParameterError("--fcst-cols is empty")
    return columns


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from e


def summary_stream(args: argparse.Namespace):
    """Summaries share stdout only when the primary output went to a file."""
    return sys.stdout if args.out else sys.stderr


# =============================================================================
# Subcommands
# =============================================================================

def run_score(args: argparse.Namespace) -> int:
    """Verify every selected forecast column and emit its skill report."""
    normalizer = parse_normalizer(args.normalize)
    obs, forecasts, report = ingest_csv(
        args.input, args.obs_col, parse_columns(args.fcst_cols), args.qc_min_obs
    )
    if not forecasts:
        raise ParameterError("no forecast columns selected")
    status(f"  [score] {report.rows_kept}/{report.rows_read} rows kept, "
           f"{len(forecasts)} forecast(s), horizon {args.horizon}")

    reports = [
        verify(pair(obs, fcst), obs, args.horizon, normalizer, name=fcst.name)
        for fcst in forecasts
    ]

    if args.format == "json":
        text = reports_to_json(reports)
    elif args.format == "csv":
        text = reports_to_csv(reports)
    else:
        text = reports_to_text(reports)
    write_output(text, args.out)
    return EXIT_OK


def run_calibrate(args: argparse.Namespace) -> int:
    """Fit linear calibrations and write the table with calibrated columns added."""
    schemes = list(SCHEMES) if args.scheme == "all" else [args.scheme]
    frame, report = ingest_table(
        args.input, args.obs_col, parse_columns(args.fcst_cols), args.qc_min_obs
    )
    fcst_cols = report.columns[1:]
    if not fcst_cols:
        raise ParameterError("no forecast columns selected")
    obs = ObservationSeries(values=frame[args.obs_col].to_numpy(dtype=float))
    status(f"  [calibrate] {report.rows_kept}/{report.rows_read} rows kept, schemes {schemes}")

    out = summary_stream(args)
    coefficients = []
    for name in fcst_cols:
        p = pair(obs, ForecastSeries(name=name, values=frame[name].to_numpy(dtype=float)))
        fit_on, evaluate_on = p, None
        if args.train_fraction is not None:
            fit_on, evaluate_on = split_pairs(p, args.train_fraction)

        summaries = calibration_table(fit_on, schemes, evaluate=evaluate_on)
        for summary in summaries:
            calibration = summary.calibration
            frame[f"{name}_cal_{calibration.scheme}"] = apply(calibration, frame[name].to_numpy())
            coefficients.append({"forecast": name, **calibration.to_dict()})
            if args.format == "text":
                print(format_calibration(name, calibration), file=out)
        if args.format == "text":
            target = evaluate_on if evaluate_on is not None else fit_on
            print(format_calibration_table(name, summaries, dispersion_ratio(target)), file=out)

    if args.format == "json":
        print(json.dumps(coefficients, indent=2), file=out)
    elif args.format == "csv":
        print(calibrations_to_csv(coefficients), end="", file=out)

    write_output(frame.to_csv(index=False, lineterminator="\n"), args.out)
    return EXIT_OK


def run_ensemble(args: argparse.Namespace) -> int:
    """Evaluate all forecast columns as one ensemble and export the scatter data."""
    normalizer = parse_normalizer(args.normalize)
    obs, forecasts, report = ingest_csv(
        args.input, args.obs_col, parse_columns(args.fcst_cols), args.qc_min_obs
    )
    status(f"  [ensemble] {len(forecasts)} members, {report.rows_kept} rows")

    rows = evaluate_ensemble(obs, forecasts, args.horizon, normalizer)
    if args.out:
        scatter_export(rows, args.out, args.svg, args.color_by)
    else:
        write_output(rows_to_frame(rows).to_csv(index=False, lineterminator="\n"), None)
        if args.svg:
            write_output(render_scatter_svg(rows, args.color_by), args.svg)

    summary = ensemble_summary(rows)
    print(
        f"front {summary['front_size']}/{summary['members']}; "
        f"min nMAE: {summary['min_nmae']}; min nRMSE: {summary['min_nrmse']}; "
        f"max potential: {summary['max_potential']}",
        file=summary_stream(args),
    )
    return EXIT_OK


def run_synth(args: argparse.Namespace) -> int:
    """Write a seeded synthetic dataset in the standard CSV layout."""
    spec = SynthSpec(
        n=args.n,
        phi=args.phi,
        mu=args.mu,
        sigma=args.sigma,
        rho_target=args.rho_target,
        bias=args.bias,
        gain=args.gain,
        seed=args.seed,
        noise=args.noise,
    )
    if args.members < 0:
        raise ParameterError(f"--members must be non-negative, got {args.members}")
    frame = generate_dataset(spec, members=args.members)
    write_output(frame.to_csv(index=False, lineterminator="\n"), args.out)

    obs = ObservationSeries(values=frame["obs"].to_numpy())
    gamma = lag_autocorrelation(obs, 1)
    rho = pearson(pair(obs, ForecastSeries(name="fcst", values=frame["fcst"].to_numpy())))
    out = summary_stream(args)
    print(f"sample gamma(1) = {gamma:.4f} (phi = {spec.phi}); sample rho = {rho:.4f}", file=out)
    if rho < 0:
        print("warning: sample correlation is negative (gain < 0)", file=out)
    return EXIT_OK


# =============================================================================
# Argument parsing
# =============================================================================

def build_parser() -> ArgumentParser:
    parser = ArgumentParser(description="Forecast verification with potential skill scores")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    commands.required = True

    def add_input_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--input", required=True, help="Input CSV")
        sub.add_argument("--obs-col", default=DEFAULT_OBS_COL, help="Observation column")
        sub.add_argument(
            "--fcst-cols",
            help="Comma-separated forecast columns (default: all non-obs, non-time columns)",
        )
        sub.add_argument("--qc-min-obs", type=float, help="Drop rows with observation below this")
        sub.add_argument("--out", help="Output path (default: stdout)")

    def add_scoring_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--horizon", type=positive_int, default=DEFAULT_HORIZON,
                         help="Forecast horizon in steps")
        sub.add_argument("--normalize", default="mean", help="mean | capacity:<value>")

    score = commands.add_parser("score", help="Skill report per forecast")
    add_input_flags(score)
    add_scoring_flags(score)
    score.add_argument("--format", choices=["text", "json", "csv"], default="text")
    score.set_defaults(handler=run_score)

    calibrate = commands.add_parser("calibrate", help="Linear calibration")
    add_input_flags(calibrate)
    calibrate.add_argument("--scheme", choices=list(SCHEMES) + ["all"], default="mse")
    calibrate.add_argument("--train-fraction", type=float,
                           help="Fit on this leading share of rows, evaluate on the rest")
    calibrate.add_argument("--format", choices=["text", "json", "csv"], default="text")
    calibrate.set_defaults(handler=run_calibrate)

    ensemble = commands.add_parser("ensemble", help="Pareto front of many forecasts")
    add_input_flags(ensemble)
    add_scoring_flags(ensemble)
    ensemble.add_argument("--svg", help="Also write an SVG scatter here")
    ensemble.add_argument("--color-by", choices=["potential", "rho"], default="potential")
    ensemble.add_argument("--format", choices=["csv"], default="csv")
    ensemble.set_defaults(handler=run_ensemble)

    synth = commands.add_parser("synth", help="Seeded synthetic dataset")
    synth.add_argument("--n", type=int, default=SynthSpec.n)
    synth.add_argument("--phi", type=float, default=SynthSpec.phi)
    synth.add_argument("--mu", type=float, default=SynthSpec.mu)
    synth.add_argument("--sigma", type=float, default=SynthSpec.sigma)
    synth.add_argument("--rho-target", type=float, default=SynthSpec.rho_target)
    synth.add_argument("--bias", type=float, default=SynthSpec.bias)
    synth.add_argument("--gain", type=float, default=SynthSpec.gain)
    synth.add_argument("--seed", type=non_negative_int, default=DEFAULT_SEED)
    synth.add_argument("--noise", choices=list(FORECAST_NOISE_SHAPES), default=SynthSpec.noise,
                       help="Forecast noise shape")
    synth.add_argument("--members", type=int, default=0, help="Extra ensemble columns fcst_k")
    synth.add_argument("--out", help="Output path (default: stdout)")
    synth.set_defaults(handler=run_synth)

    return parser


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point. Returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except VerificationError as e:
        status(f"error: {e}")
        return e.exit_code

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    banner(f"Forecast verification: {args.command}")

    try:
        code = args.handler(args)
    except VerificationError as e:
        status(f"error: {e}")
        return e.exit_code

    return code


if __name__ == "__main__":
    sys.exit(main())
