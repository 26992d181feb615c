"""Command line entry points: grid suites, stylized models, reports."""

from __future__ import annotations

import json
import os
import sys
import time

import click

from . import __version__
from .errors import ValidoptError
from .milp import SolverConfig


def _echo_result(result: dict) -> None:
    click.echo(f"wrote {len(result['rows'])} rows to {result['csv']}")
    for path in result["tables"]:
        click.echo(f"wrote {path}")
    click.echo(f"wrote {result['manifest']}")


def _write_stylized_outputs(rows, out_dir: str, meta: dict) -> None:
    from .runner import write_rows_csv, write_tables

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    write_rows_csv(rows, csv_path)
    click.echo(f"wrote {len(rows)} rows to {csv_path}")
    for path in write_tables(rows, out_dir):
        click.echo(f"wrote {path}")
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {manifest_path}")


@click.group()
@click.version_option(__version__)
def main():
    """Optimization over trained regressors with data-driven validity domains."""


@main.command()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON run configuration; defaults to the desk grid.")
@click.option("--parallel", type=int, default=None,
              help="Concurrent experiments (overrides the config).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None, help="Output directory (overrides the config).")
@click.option("--timings/--no-timings", default=None,
              help="Record setup/solve seconds in the CSV.")
def run(config_path, parallel, out_dir, timings):
    """Run a grid of benchmark experiments and write CSV + tables."""
    from .runner import RunConfig, run_suite

    try:
        cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
        if parallel is not None:
            cfg.parallelism = parallel
        if out_dir is not None:
            cfg.out_dir = out_dir
        if timings is not None:
            cfg.record_timings = timings
        cfg.__post_init__()
        started = time.time()
        result = run_suite(cfg)
    except ValidoptError as exc:
        raise click.ClickException(str(exc))
    _echo_result(result)
    click.echo(f"done in {time.time() - started:.1f}s")


@main.command("stylized-norm")
@click.option("--n1", type=int, default=5, show_default=True,
              help="Input dimension of the norm ball.")
@click.option("--seeds", type=int, default=20, show_default=True,
              help="Number of seeds, starting at --seed-start.")
@click.option("--seed-start", type=int, default=2023, show_default=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--out", "out_dir", default="results_norm", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--ball-tol", type=float, default=1e-5, show_default=True,
              help="Convergence tolerance of the norm-ball cut loop.")
@click.option("--eps/--no-eps", "with_eps", default=True, show_default=True,
              help="Include the enlarged extended hulls (slow).")
@click.option("--timings/--no-timings", default=False)
def stylized_norm(n1, seeds, seed_start, samples, out_dir, ball_tol,
                  with_eps, timings):
    """Minimize c'x over a unit ball known only through noisy samples."""
    from .runner import NORM_DOMAINS, run_stylized_norm

    domains = NORM_DOMAINS if with_eps else tuple(
        d for d in NORM_DOMAINS if d["kind"] != "ch_plus_eps")
    seed_list = tuple(range(seed_start, seed_start + seeds))
    try:
        started = time.time()
        rows, _ = run_stylized_norm(
            n1=n1, seeds=seed_list, n_samples=samples, domains=domains,
            solver=SolverConfig(ball_tol=ball_tol), record_timings=timings)
    except ValidoptError as exc:
        raise click.ClickException(str(exc))
    _write_stylized_outputs(rows, out_dir, {
        "model": "stylized_norm", "n1": n1, "seeds": list(seed_list),
        "n_samples": samples, "ball_tol": ball_tol,
        "domains": [dict(d) for d in domains],
        "wall_seconds": round(time.time() - started, 3)})


@main.command("stylized-price")
@click.option("--seeds", type=int, default=100, show_default=True,
              help="Number of seeds, starting at --seed-start.")
@click.option("--seed-start", type=int, default=2023, show_default=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--grid-step", type=float, default=0.005, show_default=True,
              help="Price grid resolution for the enumeration solve.")
@click.option("--out", "out_dir", default="results_price", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--timings/--no-timings", default=False)
def stylized_price(seeds, seed_start, samples, grid_step, out_dir, timings):
    """Two-product revenue maximization with learned demand curves."""
    from .runner import PRICE_DOMAINS, price_truth, run_stylized_price

    seed_list = tuple(range(seed_start, seed_start + seeds))
    try:
        started = time.time()
        truth = price_truth(grid_step)
        rows, _ = run_stylized_price(
            seeds=seed_list, n_samples=samples, grid_step=grid_step,
            record_timings=timings)
    except ValidoptError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"true optimum p = ({truth.x_star[0]:.3f}, "
               f"{truth.x_star[1]:.3f}), revenue = {truth.v_star:,.0f}")
    _write_stylized_outputs(rows, out_dir, {
        "model": "stylized_price", "seeds": list(seed_list),
        "n_samples": samples, "grid_step": grid_step,
        "domains": [dict(d) for d in PRICE_DOMAINS],
        "true_optimum": [float(v) for v in truth.x_star],
        "true_value": truth.v_star,
        "wall_seconds": round(time.time() - started, 3)})


@main.command()
@click.argument("csvs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default="report", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--statistic", type=click.Choice(["median", "mean"]),
              default="median", show_default=True)
def report(csvs, out_dir, statistic):
    """Aggregate result CSVs into tables, ratio stats, and figures."""
    from .report import emit_report

    try:
        result = emit_report(list(csvs), out_dir, statistic=statistic)
    except ValidoptError as exc:
        raise click.ClickException(str(exc))
    for path in result["tables"] + result["figures"]:
        click.echo(f"wrote {path}")
    click.echo(f"wrote {result['summary']}")


@main.command()
def selftest():
    """Run the fast invariant suite; exit nonzero on any failure."""
    from .selftest import run_selftest

    if not run_selftest(click.echo):
        sys.exit(1)


if __name__ == "__main__":
    main()
