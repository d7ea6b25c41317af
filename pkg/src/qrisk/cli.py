"""Command-line interface: entropy management (`rng`), risk jobs (`risk`),
precision studies (`study`), and the HTTP service (`serve`)."""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import market
from .bits import BitBuffer, bits_to_uniform
from .errors import QriskError
from .pool import pool_create
from .randtest import run_battery
from .report import (
    render_risk_report,
    render_validation_report,
    write_precision_report,
    write_risk_report,
    write_validation_report,
)
from .risk import RiskJobConfig, precision_study, run_risk_job
from .sources import (
    SourceRegistry,
    draw_uniform_samples,
    ingest_measurement_records,
    make_bit_source,
    parse_source_spec,
    records_to_bits,
)


def _resolve_source(spec: str, data_dir: str | None):
    """A --source value is either an id registered under --data-dir or an
    inline descriptor like ``pseudo:seed=42`` / ``pool:entropy.qpool``."""
    if data_dir:
        registry = SourceRegistry(Path(data_dir) / "sources.json")
        try:
            return registry.get(spec)
        except QriskError:
            pass
    return parse_source_spec(spec)


@click.group()
def main():
    """Portfolio risk engine with pluggable randomness sources."""


@main.group()
def rng():
    """Entropy acquisition and validation."""


@rng.command("fetch")
@click.option("--source", "source_spec", required=True,
              help="source id (with --data-dir) or inline spec")
@click.option("--words", type=int, required=True,
              help="number of 16-bit words to fetch")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--data-dir", default=None, type=click.Path())
def rng_fetch(source_spec, words, out_path, data_dir):
    """Pre-generate entropy into a pool file."""
    descriptor = _resolve_source(source_spec, data_dir)
    src = make_bit_source(descriptor)
    pool = pool_create(out_path, src.take_bytes, words * 2,
                       source_id=descriptor.id)
    click.echo(f"pool {out_path}: {pool.total_bytes} bytes from {descriptor.id}")


@rng.command("ingest")
@click.option("--records", "records_path", required=True,
              type=click.Path(exists=True))
@click.option("--extract", is_flag=True, help="apply Von Neumann de-biasing")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="also write the bits into a pool file")
def rng_ingest(records_path, extract, out_path):
    """Ingest a QPU measurement-record file."""
    records = ingest_measurement_records(records_path)
    bits = records_to_bits(records, apply_extractor=extract)
    click.echo(f"backend = {records.backend_label}")
    click.echo(f"shots = {records.shots}")
    click.echo(f"bits_per_shot = {records.bits_per_shot}")
    click.echo(f"bits = {len(bits)}")
    if out_path:
        payload = bits.to_bytes()[: len(bits) // 8]
        if not payload:
            raise click.ClickException("fewer than 8 usable bits; no pool written")
        it = iter([payload])

        def take(n):
            return next(it, b"")[:n]

        pool = pool_create(out_path, take, len(payload),
                           source_id=f"records:{records.backend_label}",
                           extractor=extract)
        click.echo(f"pool = {out_path} ({pool.total_bytes} bytes)")


@rng.command("validate")
@click.option("--source", "source_spec", required=True)
@click.option("--samples", type=int, required=True,
              help="number of uniform samples to test")
@click.option("--report", "report_path", default=None, type=click.Path())
@click.option("--data-dir", default=None, type=click.Path())
def rng_validate(source_spec, samples, report_path, data_dir):
    """Run the statistical battery; exit 0 on pass, 2 on fail."""
    descriptor = _resolve_source(source_spec, data_dir)
    batch = draw_uniform_samples(descriptor, samples)
    result = run_battery(batch.values, source_id=descriptor.id)
    text = render_validation_report(result)
    click.echo(text, nl=False)
    if report_path:
        write_validation_report(result, report_path, samples=batch.values)
    if not result.overall_pass:
        sys.exit(2)


def _job_config(prices, portfolio_file, random_weights, method, alpha,
                horizon, paths, source_spec, compounding, return_kind,
                data_dir):
    table = market.load_prices(prices)
    if portfolio_file:
        portfolio = market.load_portfolio(portfolio_file)
    elif random_weights is not None:
        portfolio = market.random_portfolio(table.tickers, random_weights)
    else:
        raise click.ClickException("give --portfolio or --random-weights SEED")
    _, moments, series = market.portfolio_inputs(
        table, portfolio, return_kind=return_kind)
    if method == "hist":
        return RiskJobConfig(portfolio=portfolio, method="historical",
                             alpha=alpha, horizon_days=horizon, series=series)
    if not source_spec:
        raise click.ClickException("--source is required for --method mc")
    descriptor = _resolve_source(source_spec, data_dir)
    return RiskJobConfig(
        portfolio=portfolio, method="monte-carlo", alpha=alpha,
        horizon_days=horizon, paths=paths, source=descriptor,
        moments=moments, compounding=compounding)


_risk_options = [
    click.option("--prices", required=True, type=click.Path(exists=True)),
    click.option("--portfolio", "portfolio_file", default=None,
                 type=click.Path(exists=True)),
    click.option("--random-weights", type=int, default=None,
                 help="seed for random portfolio weights"),
    click.option("--method", type=click.Choice(["hist", "mc"]), default="mc"),
    click.option("--alpha", type=float, default=0.01),
    click.option("--horizon", type=int, default=1),
    click.option("--paths", type=int, default=1_000_000),
    click.option("--source", "source_spec", default=None),
    click.option("--compounding", type=click.Choice(["sum", "sqrt_h"]),
                 default="sum"),
    click.option("--return-kind", type=click.Choice(["log", "simple"]),
                 default="log"),
    click.option("--data-dir", default=None, type=click.Path()),
    click.option("--report", "report_path", default=None, type=click.Path()),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@main.group()
def risk():
    """VaR/CVaR estimation."""


@risk.command("run")
@_with_options(_risk_options)
def risk_run(prices, portfolio_file, random_weights, method, alpha, horizon,
             paths, source_spec, compounding, return_kind, data_dir,
             report_path):
    """Run one historical or Monte Carlo risk job."""
    config = _job_config(prices, portfolio_file, random_weights, method,
                         alpha, horizon, paths, source_spec, compounding,
                         return_kind, data_dir)
    report, returns = run_risk_job(config, keep_returns=bool(report_path))
    click.echo(render_risk_report(report), nl=False)
    if report_path:
        write_risk_report(report, report_path, returns=returns)


@main.group()
def study():
    """Estimator-dispersion studies over repeated runs."""


@study.command("run")
@click.option("--runs", type=int, default=5)
@click.option("--shared-seed", is_flag=True,
              help="reuse one seed for every run (dispersion must be 0)")
@_with_options(_risk_options)
def study_run(runs, shared_seed, prices, portfolio_file, random_weights,
              method, alpha, horizon, paths, source_spec, compounding,
              return_kind, data_dir, report_path):
    """Repeat a Monte Carlo job and report estimator dispersion."""
    config = _job_config(prices, portfolio_file, random_weights, method,
                         alpha, horizon, paths, source_spec, compounding,
                         return_kind, data_dir)
    result = precision_study(config, runs,
                             independent_substreams=not shared_seed)
    from .report import render_precision_report
    click.echo(render_precision_report(result), nl=False)
    if report_path:
        write_precision_report(result, report_path)


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--data-dir", default="./qrisk-data", type=click.Path())
@click.option("--workers", "job_workers", type=int, default=2)
def serve(host, port, data_dir, job_workers):
    """Start the HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir, max_workers=job_workers),
                host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
