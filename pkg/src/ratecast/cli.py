"""Command-line front end.

Subcommands: select-lambda, forecast, evaluate, decompose, simulate.
All outputs are CSV (plot-ready); rendering is left to external tools.
Exit codes: 0 success, 1 validation error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import csv
import io
import logging
import sys
from contextlib import contextmanager

import click
import numpy as np

from .evaluation import HorizonErrorTable
from .exceptions import DataError, NumericalError
from .forecasting import SurfaceForecaster, prediction_interval
from .lambda_select import compare_lambdas, optimize_lambda
from .simulate import synthetic_surface
from .surface import AgeRateSurface, load_rates, save_rates, split_by_fraction


def _fmt(value) -> str:
    """Shortest round-trip decimal form; keeps outputs byte-identical."""
    return repr(float(value))


@contextmanager
def _open_output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr,
                        force=True)


def _load_surface(path: str, floor: float | None) -> AgeRateSurface:
    return load_rates(path, floor=floor)


def _parse_lambdas(raw: str) -> list[float]:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    if not items:
        raise ValueError("no lambda values supplied")
    try:
        return [float(part) for part in items]
    except ValueError:
        raise ValueError(f"could not parse lambda list {raw!r}")


@click.group()
def cli():
    """Forecast age-by-year rate surfaces via Box-Cox transform,
    principal-component decomposition and ARIMA score forecasting, and
    select the transformation parameter by validation forecast error."""


@cli.command("select-lambda")
@click.option("--input", "input_path", required=True, help="Rate surface CSV (year,age,rate).")
@click.option("--output", "output_path", default=None, help="Trace CSV destination (default stdout).")
@click.option("--criterion", type=click.Choice(["point", "interval"]), default="point", show_default=True)
@click.option("--method", type=click.Choice(["brent", "grid"]), default="brent", show_default=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--alpha", type=float, default=0.2, show_default=True)
@click.option("--tolerance", type=float, default=1e-3, show_default=True, help="Brent lambda tolerance.")
@click.option("--grid-step", type=float, default=0.01, show_default=True)
@click.option("--floor", type=float, default=None, help="Raise rates below this value to it.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--verbose", is_flag=True)
def cmd_select_lambda(input_path, output_path, criterion, method,
                      test_fraction, alpha, tolerance, grid_step, floor,
                      jobs, verbose):
    """Select the Box-Cox parameter on the validation span."""
    _configure_logging(verbose)
    surface = _load_surface(input_path, floor)
    split = split_by_fraction(surface, test_fraction)
    selection = optimize_lambda(surface, criterion, split, alpha=alpha,
                                method=method, tolerance=tolerance,
                                grid_step=grid_step, n_jobs=jobs)
    with _open_output(output_path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["lambda", "objective", "selected"])
        for lam, value in selection.evaluations:
            writer.writerow([_fmt(lam), _fmt(value),
                             int(lam == selection.lambda_star)])
    if output_path is not None:
        click.echo(f"lambda_star={_fmt(selection.lambda_star)} "
                   f"objective_value={_fmt(selection.objective_value)} "
                   f"criterion={criterion} method={method}")


@cli.command("forecast")
@click.option("--input", "input_path", required=True)
@click.option("--output", "output_path", default=None)
@click.option("--lambda", "lmbda", type=float, required=True, help="Box-Cox parameter in [0, 1].")
@click.option("--horizon", type=int, default=10, show_default=True)
@click.option("--fit-end", type=int, default=None, help="Last year used for fitting (default: last year).")
@click.option("--alpha", type=float, default=0.2, show_default=True)
@click.option("--floor", type=float, default=None)
@click.option("--verbose", is_flag=True)
def cmd_forecast(input_path, output_path, lmbda, horizon, fit_end, alpha,
                 floor, verbose):
    """Fit on years up to --fit-end and emit rate forecasts with bounds."""
    _configure_logging(verbose)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    surface = _load_surface(input_path, floor)
    if fit_end is not None:
        surface = surface.through_year(fit_end)
    model = SurfaceForecaster(lmbda=lmbda, alpha=alpha).fit(surface)
    fc = model.predict(horizon)
    with _open_output(output_path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["horizon", "age", "point", "lower", "upper", "clamped"])
        for h in range(fc.horizon):
            for j, age in enumerate(fc.ages):
                writer.writerow([h + 1, int(age), _fmt(fc.rate_point[h, j]),
                                 _fmt(fc.rate_lower[h, j]),
                                 _fmt(fc.rate_upper[h, j]),
                                 int(fc.clamped[h, j])])


def _write_comparison(handle, results: list[tuple[float, HorizonErrorTable]]):
    writer = csv.writer(handle, lineterminator="\n")
    header = ["h"]
    header += [f"mafe_{_fmt(lam)}" for lam, _ in results]
    header += [f"interval_score_{_fmt(lam)}" for lam, _ in results]
    writer.writerow(header)
    horizons = results[0][1].horizons
    for i, h in enumerate(horizons):
        row = [int(h)]
        row += [_fmt(table.mafe[i]) for _, table in results]
        row += [_fmt(table.interval_score[i]) for _, table in results]
        writer.writerow(row)
    mean_row = ["mean"]
    mean_row += [_fmt(table.mean_mafe) for _, table in results]
    mean_row += [_fmt(table.mean_interval_score) for _, table in results]
    writer.writerow(mean_row)
    median_row = ["median"]
    median_row += [_fmt(table.median_mafe) for _, table in results]
    median_row += [_fmt(table.median_interval_score) for _, table in results]
    writer.writerow(median_row)


@cli.command("evaluate")
@click.option("--input", "input_path", required=True)
@click.option("--output", "output_path", default=None)
@click.option("--lambdas", required=True, help="Comma-separated Box-Cox parameters, e.g. '0.46,0,0.4'.")
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--alpha", type=float, default=0.2, show_default=True)
@click.option("--floor", type=float, default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--verbose", is_flag=True)
def cmd_evaluate(input_path, output_path, lambdas, test_fraction, alpha,
                 floor, jobs, verbose):
    """Per-horizon accuracy of candidate lambdas on the test span."""
    _configure_logging(verbose)
    lams = _parse_lambdas(lambdas)
    surface = _load_surface(input_path, floor)
    split = split_by_fraction(surface, test_fraction)
    results = compare_lambdas(surface, lams, split, alpha=alpha, n_jobs=jobs)
    with _open_output(output_path) as handle:
        _write_comparison(handle, results)


@cli.command("decompose")
@click.option("--input", "input_path", required=True)
@click.option("--output", "output_path", default=None)
@click.option("--lambda", "lmbda", type=float, required=True)
@click.option("--horizon", type=int, default=10, show_default=True, help="Score-forecast horizon.")
@click.option("--fit-end", type=int, default=None)
@click.option("--alpha", type=float, default=0.2, show_default=True)
@click.option("--floor", type=float, default=None)
@click.option("--verbose", is_flag=True)
def cmd_decompose(input_path, output_path, lmbda, horizon, fit_end, alpha,
                  floor, verbose):
    """Emit the mean curve, components, scores and score forecasts
    (the plot-ready decomposition data)."""
    _configure_logging(verbose)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    surface = _load_surface(input_path, floor)
    if fit_end is not None:
        surface = surface.through_year(fit_end)
    model = SurfaceForecaster(lmbda=lmbda, alpha=alpha).fit(surface)
    decomp = model.decomposition_
    from .forecasting import forecast_scores
    score_fc = forecast_scores(decomp, horizon, model.score_fits_)
    lo, hi = prediction_interval(score_fc.points, score_fc.variances, alpha)
    last_year = int(surface.years[-1])
    with _open_output(output_path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["series", "component", "index", "value", "lower", "upper"])
        for j, age in enumerate(decomp.ages):
            writer.writerow(["mean", 0, int(age), _fmt(decomp.mean[j]), "", ""])
        for k in range(decomp.n_components):
            for j, age in enumerate(decomp.ages):
                writer.writerow(["component", k + 1, int(age),
                                 _fmt(decomp.components[k, j]), "", ""])
        for k in range(decomp.n_components):
            for i, year in enumerate(decomp.years):
                writer.writerow(["score", k + 1, int(year),
                                 _fmt(decomp.scores[i, k]), "", ""])
        for k in range(decomp.n_components):
            for h in range(horizon):
                writer.writerow(["score_forecast", k + 1, last_year + h + 1,
                                 _fmt(score_fc.points[h, k]),
                                 _fmt(lo[h, k]), _fmt(hi[h, k])])


@cli.command("simulate", hidden=True)
@click.option("--output", "output_path", default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lambda", "lmbda", type=float, default=0.5, show_default=True)
@click.option("--years", type=int, default=60, show_default=True)
@click.option("--start-year", type=int, default=1921, show_default=True)
@click.option("--components", type=int, default=1, show_default=True)
@click.option("--score-drift", type=float, default=0.04, show_default=True)
@click.option("--score-sigma", type=float, default=0.004, show_default=True)
@click.option("--noise-sigma", type=float, default=0.005, show_default=True)
def cmd_simulate(output_path, seed, lmbda, years, start_year, components,
                 score_drift, score_sigma, noise_sigma):
    """Generate a synthetic surface from the known generative model."""
    surface = synthetic_surface(n_years=years, start_year=start_year,
                                lmbda=lmbda, n_components=components,
                                score_drift=score_drift,
                                score_sigma=score_sigma,
                                noise_sigma=noise_sigma, seed=seed)
    if output_path is None:
        buffer = io.StringIO()
        save_rates(surface, buffer)
        sys.stdout.write(buffer.getvalue())
    else:
        save_rates(surface, output_path)


def main(argv=None) -> int:
    """Entry point with exit-code mapping (0 ok, 1 validation, 2 data,
    3 numerical)."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
